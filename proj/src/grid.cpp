#include "popsize/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace popsize {

Grid::Grid(int dim, std::array<double, 2> extents, std::array<int, 2> cells)
    : dim_(dim), extents_(extents), cells_(cells) {
  for (int a = 0; a < dim_; ++a) {
    if (!(extents_[a] > 0.0) || !std::isfinite(extents_[a])) {
      throw InvalidArgument("grid extent must be positive and finite");
    }
    if (cells_[a] < 4) throw InvalidArgument("grid needs at least 4 cells per axis");
  }
}

Grid Grid::interval(double length, int cells) { return Grid(1, {length, 1.0}, {cells, 1}); }

Grid Grid::box(double a1, double a2, int nx, int ny) { return Grid(2, {a1, a2}, {nx, ny}); }

double Grid::cell_volume() const {
  return dim_ == 1 ? spacing(0) : spacing(0) * spacing(1);
}

double Grid::measure() const { return dim_ == 1 ? extents_[0] : extents_[0] * extents_[1]; }

bool Grid::operator==(const Grid& other) const {
  if (dim_ != other.dim_) return false;
  for (int a = 0; a < dim_; ++a) {
    if (cells_[a] != other.cells_[a] || extents_[a] != other.extents_[a]) return false;
  }
  return true;
}

std::string Grid::describe() const {
  std::ostringstream os;
  if (dim_ == 1) {
    os << "interval(0," << extents_[0] << ") N=" << cells_[0];
  } else {
    os << "box(0," << extents_[0] << ")x(0," << extents_[1] << ") " << cells_[0] << "x"
       << cells_[1];
  }
  return os.str();
}

Field::Field(Grid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw InvalidArgument("field value count does not match grid cell count");
  }
}

Field Field::constant(const Grid& g, double c) {
  return Field(g, Eigen::VectorXd::Constant(g.size(), c));
}

Field Field::from_function(const Grid& g, const std::function<double(double)>& f) {
  if (g.dimension() != 1) throw InvalidArgument("from_function(x) needs a 1D grid");
  Eigen::VectorXd v(g.size());
  for (int i = 0; i < g.cells(0); ++i) v[i] = f(g.center(0, i));
  return Field(g, std::move(v));
}

Field Field::from_function(const Grid& g, const std::function<double(double, double)>& f) {
  if (g.dimension() != 2) throw InvalidArgument("from_function(x,y) needs a 2D grid");
  Eigen::VectorXd v(g.size());
  for (int j = 0; j < g.cells(1); ++j) {
    for (int i = 0; i < g.cells(0); ++i) v[g.index(i, j)] = f(g.center(0, i), g.center(1, j));
  }
  return Field(g, std::move(v));
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (a.grid != b.grid) throw GridMismatch(std::string(where) + ": fields live on different grids");
}

ResourceBudget::ResourceBudget(double mean_resource, double cap) : m0(mean_resource), kappa(cap) {
  if (!(m0 > 0.0) || !(kappa > m0) || !std::isfinite(kappa)) {
    throw InfeasibleBudget("resource budget requires 0 < m0 < kappa");
  }
}

Eigen::SparseMatrix<double> neumann_laplacian_matrix(const Grid& grid) {
  const int nx = grid.cells(0);
  const int ny = grid.dimension() == 1 ? 1 : grid.cells(1);
  const double ix2 = 1.0 / (grid.spacing(0) * grid.spacing(0));
  const double iy2 = grid.dimension() == 1 ? 0.0 : 1.0 / (grid.spacing(1) * grid.spacing(1));
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(std::size_t(grid.size()) * 5);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Eigen::Index k = grid.index(i, j);
      double diag = 0.0;
      auto link = [&](Eigen::Index other, double w) {
        t.emplace_back(k, other, w);
        diag -= w;
      };
      if (i > 0) link(k - 1, ix2);
      if (i + 1 < nx) link(k + 1, ix2);
      if (grid.dimension() == 2) {
        if (j > 0) link(k - nx, iy2);
        if (j + 1 < ny) link(k + nx, iy2);
      }
      t.emplace_back(k, k, diag);
    }
  }
  Eigen::SparseMatrix<double> L(grid.size(), grid.size());
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

Field neumann_laplacian_apply(const Field& u) {
  if (!u.all_finite()) throw InvalidArgument("neumann_laplacian_apply: non-finite input");
  return u.with(apply_neumann_laplacian(u.grid, u.values));
}

double mean(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& u) {
  return u.sum() * grid.cell_volume() / grid.measure();
}

double mean(const Field& u) { return mean(u.grid, u.values); }

double dirichlet_energy(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& u) {
  const int nx = grid.cells(0);
  const int ny = grid.dimension() == 1 ? 1 : grid.cells(1);
  const double hx = grid.spacing(0);
  double acc = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const Eigen::Index k = grid.index(i, j);
      const double d = (u[k + 1] - u[k]) / hx;
      acc += d * d;
    }
  }
  if (grid.dimension() == 2) {
    const double hy = grid.spacing(1);
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const Eigen::Index k = grid.index(i, j);
        const double d = (u[k + nx] - u[k]) / hy;
        acc += d * d;
      }
    }
  }
  return acc * grid.cell_volume() / grid.measure();
}

double dirichlet_energy(const Field& u) { return dirichlet_energy(u.grid, u.values); }

double weighted_dirichlet_energy(const Field& u, const Field& w) {
  require_same_grid(u, w, "weighted_dirichlet_energy");
  const Grid& grid = u.grid;
  const int nx = grid.cells(0);
  const int ny = grid.dimension() == 1 ? 1 : grid.cells(1);
  double acc = 0.0;
  auto face = [&](Eigen::Index a, Eigen::Index b, double h) {
    const double d = (u[b] - u[a]) / h;
    const double wf = 0.5 * (w[a] + w[b]);
    acc += d * d / (wf * wf);
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) face(grid.index(i, j), grid.index(i + 1, j), grid.spacing(0));
  }
  if (grid.dimension() == 2) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i < nx; ++i) face(grid.index(i, j), grid.index(i, j + 1), grid.spacing(1));
    }
  }
  return acc * grid.cell_volume() / grid.measure();
}

double l1_distance(const Field& a, const Field& b) {
  require_same_grid(a, b, "l1_distance");
  return (a.values - b.values).cwiseAbs().sum() * a.grid.cell_volume();
}

Field reflect(const Field& u, int axis) {
  const Grid& g = u.grid;
  if (axis < 0 || axis >= g.dimension()) throw InvalidArgument("reflect: bad axis");
  const int nx = g.cells(0);
  const int ny = g.dimension() == 1 ? 1 : g.cells(1);
  Eigen::VectorXd v(u.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int si = axis == 0 ? nx - 1 - i : i;
      const int sj = axis == 1 ? ny - 1 - j : j;
      v[g.index(i, j)] = u[g.index(si, sj)];
    }
  }
  return u.with(std::move(v));
}

namespace {

// Extents recovered from cell centers carry rounding noise; snap them to 12 digits.
double snap(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return std::stod(os.str());
}

// Fraction of cell [lo,hi] covered by interval [a,b].
double coverage(double lo, double hi, double a, double b) {
  const double overlap = std::min(hi, b) - std::max(lo, a);
  const double f = overlap > 0.0 ? overlap / (hi - lo) : 0.0;
  // Interfaces that sit on a face must give exact 0/1 cells.
  if (f < 1e-9) return 0.0;
  if (f > 1.0 - 1e-9) return 1.0;
  return f;
}

// Cell-averaged kappa * indicator of a union of x-intervals, extruded along y in 2D.
Field indicator_along_x(const Grid& grid, double kappa,
                        std::initializer_list<std::pair<double, double>> pieces) {
  const int nx = grid.cells(0);
  const int ny = grid.dimension() == 1 ? 1 : grid.cells(1);
  const double h = grid.spacing(0);
  Eigen::VectorXd v(grid.size());
  for (int i = 0; i < nx; ++i) {
    double c = 0.0;
    for (const auto& [a, b] : pieces) c += coverage(i * h, (i + 1) * h, a, b);
    for (int j = 0; j < ny; ++j) v[grid.index(i, j)] = kappa * std::min(c, 1.0);
  }
  return Field(grid, std::move(v));
}

}  // namespace

Field crenel_right(const Grid& grid, const ResourceBudget& budget) {
  const double a = grid.extent(0);
  return indicator_along_x(grid, budget.kappa, {{a * (1.0 - budget.crenel_length()), a}});
}

Field crenel_left(const Grid& grid, const ResourceBudget& budget) {
  const double a = grid.extent(0);
  return indicator_along_x(grid, budget.kappa, {{0.0, a * budget.crenel_length()}});
}

Field double_crenel(const Grid& grid, const ResourceBudget& budget) {
  const double a = grid.extent(0);
  const double half = 0.5 * a * budget.crenel_length();
  return indicator_along_x(grid, budget.kappa, {{0.0, half}, {a - half, a}});
}

void write_field_csv(std::ostream& os, const Field& u) {
  const Grid& g = u.grid;
  os << std::setprecision(17);
  if (g.dimension() == 1) {
    os << "x,value\n";
    for (int i = 0; i < g.cells(0); ++i) os << g.center(0, i) << ',' << u[i] << '\n';
  } else {
    os << "x,y,value\n";
    for (int j = 0; j < g.cells(1); ++j) {
      for (int i = 0; i < g.cells(0); ++i) {
        os << g.center(0, i) << ',' << g.center(1, j) << ',' << u[g.index(i, j)] << '\n';
      }
    }
  }
}

void write_field_csv(const std::string& path, const Field& u) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_field_csv(os, u);
  if (!os) throw Error("write failed: " + path);
}

Field read_field_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw InvalidArgument("field CSV: missing header");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const bool two_d = header == "x,y,value";
  if (!two_d && header != "x,value") throw InvalidArgument("field CSV: unexpected header '" + header + "'");

  std::vector<std::array<double, 3>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::array<double, 3> r{0, 0, 0};
    char comma = 0;
    if (two_d) {
      ls >> r[0] >> comma >> r[1] >> comma >> r[2];
    } else {
      ls >> r[0] >> comma >> r[2];
    }
    if (!ls) throw InvalidArgument("field CSV: malformed row '" + line + "'");
    rows.push_back(r);
  }
  if (rows.empty()) throw InvalidArgument("field CSV: no rows");

  if (!two_d) {
    const int n = int(rows.size());
    const double h = 2.0 * rows.front()[0];
    Grid g = Grid::interval(snap(h * n), n);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rows[std::size_t(i)][2];
    return Field(g, std::move(v));
  }
  // 2D rows are x-fastest; count the distinct x values in the first sweep.
  int nx = 0;
  while (nx < int(rows.size()) && rows[std::size_t(nx)][1] == rows.front()[1]) ++nx;
  const int ny = int(rows.size()) / nx;
  if (nx * ny != int(rows.size())) throw InvalidArgument("field CSV: rows do not form a box grid");
  const double hx = 2.0 * rows.front()[0];
  const double hy = 2.0 * rows.front()[1];
  Grid g = Grid::box(snap(hx * nx), snap(hy * ny), nx, ny);
  Eigen::VectorXd v(g.size());
  for (std::size_t k = 0; k < rows.size(); ++k) v[Eigen::Index(k)] = rows[k][2];
  return Field(g, std::move(v));
}

Field read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  return read_field_csv(is);
}

}  // namespace popsize
