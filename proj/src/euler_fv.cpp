#include "arom/euler_fv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace arom {

double minmod(double a, double b) {
  if (a * b <= 0.0)
    return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

std::pair<double, double> muscl_faces(double qm, double q, double qp) {
  const double slope = minmod(q - qm, qp - q);
  return {q - 0.5 * slope, q + 0.5 * slope};
}

void physical_flux(const Primitive& w, int axis, int dim, double gamma, double* flux) {
  const double un = w.u[axis];
  double kinetic = 0.0;
  for (int d = 0; d < dim; ++d)
    kinetic += w.u[d] * w.u[d];
  const double rhoE = w.p / (gamma - 1.0) + 0.5 * w.rho * kinetic;
  flux[0] = w.rho * un;
  for (int d = 0; d < dim; ++d)
    flux[1 + d] = w.rho * un * w.u[d];
  flux[1 + axis] += w.p;
  flux[dim + 1] = (rhoE + w.p) * un;
}

namespace {

inline double harten(double lambda, double width) {
  const double a = std::abs(lambda);
  if (width > 0.0 && a < width)
    return 0.5 * (lambda * lambda + width * width) / width;
  return a;
}

} // namespace

void roe_flux(const Primitive& L, const Primitive& R, int axis, int dim, const GasModel& gas,
              double* flux, double entropy_fix) {
  const double g = gas.gamma;
  const int c = dim + 2;
  double fl[4], fr[4];
  physical_flux(L, axis, dim, g, fl);
  physical_flux(R, axis, dim, g, fr);

  double kl = 0.0, kr = 0.0;
  for (int d = 0; d < dim; ++d) {
    kl += L.u[d] * L.u[d];
    kr += R.u[d] * R.u[d];
  }
  const double hl = (L.p / (g - 1.0) + 0.5 * L.rho * kl + L.p) / L.rho;
  const double hr = (R.p / (g - 1.0) + 0.5 * R.rho * kr + R.p) / R.rho;

  const double sl = std::sqrt(L.rho);
  const double sr = std::sqrt(R.rho);
  const double inv = 1.0 / (sl + sr);
  double u[2] = {0.0, 0.0};
  double q2 = 0.0;
  for (int d = 0; d < dim; ++d) {
    u[d] = (sl * L.u[d] + sr * R.u[d]) * inv;
    q2 += u[d] * u[d];
  }
  const double h = (sl * hl + sr * hr) * inv;
  const double a2 = (g - 1.0) * (h - 0.5 * q2);
  if (!(a2 > 0.0)) {
    std::ostringstream msg;
    msg << "Roe average has non-positive sound speed squared " << a2 << " across axis "
        << axis << " face";
    throw FluxError(msg.str());
  }
  const double a = std::sqrt(a2);
  const double rho = sl * sr;
  const double un = u[axis];

  const double drho = R.rho - L.rho;
  const double dp = R.p - L.p;
  const double dun = R.u[axis] - L.u[axis];

  const double width = entropy_fix * a;
  const double l1 = harten(un - a, width);
  const double l2 = harten(un, width);
  const double l3 = harten(un + a, width);

  const double w1 = l1 * (dp - rho * a * dun) / (2.0 * a2);
  const double w2 = l2 * (drho - dp / a2);
  const double w3 = l3 * (dp + rho * a * dun) / (2.0 * a2);

  double diss[4];
  diss[0] = w1 + w2 + w3;
  for (int d = 0; d < dim; ++d)
    diss[1 + d] = w1 * u[d] + w2 * u[d] + w3 * u[d];
  diss[1 + axis] += (w3 - w1) * a;
  diss[dim + 1] = w1 * (h - un * a) + w2 * 0.5 * q2 + w3 * (h + un * a);

  // Shear waves carry the tangential velocity jump at speed un.
  for (int d = 0; d < dim; ++d) {
    if (d == axis)
      continue;
    const double wt = l2 * rho * (R.u[d] - L.u[d]);
    diss[1 + d] += wt;
    diss[dim + 1] += wt * u[d];
  }

  for (int v = 0; v < c; ++v)
    flux[v] = 0.5 * (fl[v] + fr[v]) - 0.5 * diss[v];
}

EulerSystem::EulerSystem(Mesh mesh, GasModel gas, BoundarySpec boundary, const State& initial,
                         EulerOptions options)
    : mesh_(std::move(mesh)), gas_(gas), boundary_(boundary), options_(options),
      vars_(num_vars(mesh_.dim())), initial_(initial.flat()) {
  if (!(gas_.gamma > 1.0))
    throw std::invalid_argument("EulerSystem: gamma must exceed 1");
  if (!(initial.mesh() == mesh_))
    throw std::invalid_argument("EulerSystem: initial state lives on a different mesh");
  for (int a = 0; a < mesh_.dim(); ++a)
    if (mesh_.cells(a) < 2)
      throw std::invalid_argument("EulerSystem: need at least two cells per axis");
}

void EulerSystem::stencil(Index cell, std::vector<Index>& out) const {
  out.clear();
  const auto ij = mesh_.cell_coords(cell);
  const Index nx = mesh_.cells(0);
  const Index ny = mesh_.cells(1);
  const Index r = 2;
  if (mesh_.dim() == 2)
    for (Index dy = -r; dy < 0; ++dy)
      if (ij[1] + dy >= 0)
        out.push_back(mesh_.cell_index(ij[0], ij[1] + dy));
  for (Index dx = -r; dx <= r; ++dx)
    if (ij[0] + dx >= 0 && ij[0] + dx < nx)
      out.push_back(mesh_.cell_index(ij[0] + dx, ij[1]));
  if (mesh_.dim() == 2)
    for (Index dy = 1; dy <= r; ++dy)
      if (ij[1] + dy < ny)
        out.push_back(mesh_.cell_index(ij[0], ij[1] + dy));
}

bool EulerSystem::admissible(const double* cell_values) const {
  return arom::admissible(cell_values, mesh_.dim(), gas_.gamma);
}

template <int Dim>
struct EulerKernel {
  static constexpr int C = Dim + 2;
  using Cons = std::array<double, C>;

  const EulerSystem& sys;
  const double* q;

  // Cell (ix, iy), where the coordinate along `axis` may reach two cells past
  // either end of the mesh; such cells are ghosts.
  void load(Index ix, Index iy, int axis, Cons& out) const {
    const Mesh& m = sys.mesh_;
    const Index n = m.cells(axis);
    const Index j = axis == 0 ? ix : iy;
    if (j >= 0 && j < n) {
      const double* src = q + m.cell_index(ix, iy) * C;
      std::copy(src, src + C, out.begin());
      return;
    }
    const int side = 2 * axis + (j < 0 ? 0 : 1);
    if (sys.boundary_.sides[side] == BoundaryKind::Wall) {
      const Index jm = j < 0 ? -1 - j : 2 * n - 1 - j;
      const Index cell = axis == 0 ? m.cell_index(jm, iy) : m.cell_index(ix, jm);
      const double* src = q + cell * C;
      std::copy(src, src + C, out.begin());
      out[1 + axis] = -out[1 + axis];
    } else {
      const Index jc = j < 0 ? 0 : n - 1;
      const Index cell = axis == 0 ? m.cell_index(jc, iy) : m.cell_index(ix, jc);
      const double* src = sys.initial_.data() + cell * C;
      std::copy(src, src + C, out.begin());
    }
  }

  static Primitive primitive(const Cons& u, double gamma) {
    return to_primitive(u.data(), Dim, gamma);
  }

  static bool ok(const Primitive& w) {
    return w.rho > 0.0 && w.p > 0.0 && std::isfinite(w.rho) && std::isfinite(w.p);
  }

  Index domain_cell(Index ix, Index iy, int axis) const {
    const Mesh& m = sys.mesh_;
    const Index n = m.cells(axis);
    if (axis == 0)
      ix = std::clamp<Index>(ix, 0, n - 1);
    else
      iy = std::clamp<Index>(iy, 0, n - 1);
    return m.cell_index(ix, iy);
  }

  // Primitive variables of every cell, shared by the faces of a large
  // evaluation. Null: convert on the fly.
  const Primitive* prims = nullptr;

  // Flux through the low face (along `axis`) of cell (ix, iy).
  void face_flux(Index ix, Index iy, int axis, double* flux) const {
    const double gamma = sys.gas_.gamma;
    const Mesh& m = sys.mesh_;
    const Index j = axis == 0 ? ix : iy;
    Cons a, b, c, d; // cells at offsets -2, -1, 0, +1 along axis
    Primitive wb, wc;
    if (j >= 2 && j + 1 < m.cells(axis)) {
      const Index step = axis == 0 ? 1 : m.cells(0);
      const Index cell = m.cell_index(ix, iy);
      const double* pc = q + cell * C;
      const Index s = step * C;
      std::copy(pc - 2 * s, pc - 2 * s + C, a.begin());
      std::copy(pc - s, pc - s + C, b.begin());
      std::copy(pc, pc + C, c.begin());
      std::copy(pc + s, pc + s + C, d.begin());
      wb = prims ? prims[cell - step] : primitive(b, gamma);
      wc = prims ? prims[cell] : primitive(c, gamma);
    } else {
      const Index sx = axis == 0 ? 1 : 0;
      const Index sy = axis == 1 ? 1 : 0;
      load(ix - 2 * sx, iy - 2 * sy, axis, a);
      load(ix - sx, iy - sy, axis, b);
      load(ix, iy, axis, c);
      load(ix + sx, iy + sy, axis, d);
      wb = primitive(b, gamma);
      wc = primitive(c, gamma);
    }
    if (!ok(wb))
      throw PositivityError(domain_cell(ix - (axis == 0), iy - (axis == 1), axis),
                            "inadmissible state entering reconstruction");
    if (!ok(wc))
      throw PositivityError(domain_cell(ix, iy, axis),
                            "inadmissible state entering reconstruction");

    Primitive left, right;
    if (sys.options_.limiting == LimitedVariables::Conservative) {
      Cons ul, ur;
      for (int v = 0; v < C; ++v) {
        ul[v] = b[v] + 0.5 * minmod(b[v] - a[v], c[v] - b[v]);
        ur[v] = c[v] - 0.5 * minmod(c[v] - b[v], d[v] - c[v]);
      }
      left = primitive(ul, gamma);
      right = primitive(ur, gamma);
    } else {
      const Primitive wa = primitive(a, gamma);
      const Primitive wd = primitive(d, gamma);
      auto rec = [](double m1, double m0, double p1, double sign) {
        return m0 + sign * 0.5 * minmod(m0 - m1, p1 - m0);
      };
      left.rho = rec(wa.rho, wb.rho, wc.rho, 1.0);
      right.rho = rec(wb.rho, wc.rho, wd.rho, -1.0);
      for (int k = 0; k < Dim; ++k) {
        left.u[k] = rec(wa.u[k], wb.u[k], wc.u[k], 1.0);
        right.u[k] = rec(wb.u[k], wc.u[k], wd.u[k], -1.0);
      }
      left.p = rec(wa.p, wb.p, wc.p, 1.0);
      right.p = rec(wb.p, wc.p, wd.p, -1.0);
    }
    // Drop to first order on a side whose reconstructed state is inadmissible.
    if (!ok(left))
      left = wb;
    if (!ok(right))
      right = wc;
    roe_flux(left, right, axis, Dim, sys.gas_, flux, sys.options_.entropy_fix);
  }

  // Shared by the full and subset paths so both produce identical rows.
  static void combine(const double* fxl, const double* fxr, const double* fyl,
                      const double* fyr, double dx, double dy, double* out) {
    if constexpr (Dim == 1) {
      (void)fyl;
      (void)fyr;
      (void)dy;
      for (int v = 0; v < C; ++v)
        out[v] = -((fxr[v] - fxl[v]) / dx);
    } else {
      for (int v = 0; v < C; ++v)
        out[v] = -((fxr[v] - fxl[v]) / dx + (fyr[v] - fyl[v]) / dy);
    }
  }

  void subset(std::span<const Index> cells, double* out) const {
    const Mesh& m = sys.mesh_;
    const double dx = m.width(0);
    const double dy = m.width(1);
    const Index nx = m.cells(0);
    const Index ny = m.cells(1);
    // Large subsets share most faces between neighbors: cache each face.
    const bool cache = 4 * static_cast<Index>(cells.size()) > m.num_cells();
    std::vector<double> fx, fy;
    std::vector<char> have_x, have_y;
    std::vector<Primitive> cell_prims;
    EulerKernel kernel = *this;
    if (cache) {
      cell_prims = all_primitives();
      kernel.prims = cell_prims.data();
      fx.resize(static_cast<std::size_t>((nx + 1) * ny * C));
      have_x.assign(static_cast<std::size_t>((nx + 1) * ny), 0);
      if constexpr (Dim == 2) {
        fy.resize(static_cast<std::size_t>(nx * (ny + 1) * C));
        have_y.assign(static_cast<std::size_t>(nx * (ny + 1)), 0);
      }
    }
    auto x_face = [&](Index f, Index iy, double* buf) -> const double* {
      if (!cache) {
        kernel.face_flux(f, iy, 0, buf);
        return buf;
      }
      const Index id = iy * (nx + 1) + f;
      double* slot = fx.data() + id * C;
      if (!have_x[static_cast<std::size_t>(id)]) {
        kernel.face_flux(f, iy, 0, slot);
        have_x[static_cast<std::size_t>(id)] = 1;
      }
      return slot;
    };
    auto y_face = [&](Index ix, Index f, double* buf) -> const double* {
      if (!cache) {
        kernel.face_flux(ix, f, 1, buf);
        return buf;
      }
      const Index id = f * nx + ix;
      double* slot = fy.data() + id * C;
      if (!have_y[static_cast<std::size_t>(id)]) {
        kernel.face_flux(ix, f, 1, slot);
        have_y[static_cast<std::size_t>(id)] = 1;
      }
      return slot;
    };
    double bxl[C], bxr[C], byl[C], byr[C];
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto ij = m.cell_coords(cells[k]);
      const double* xl = x_face(ij[0], ij[1], bxl);
      const double* xr = x_face(ij[0] + 1, ij[1], bxr);
      const double* yl = nullptr;
      const double* yr = nullptr;
      if constexpr (Dim == 2) {
        yl = y_face(ij[0], ij[1], byl);
        yr = y_face(ij[0], ij[1] + 1, byr);
      }
      combine(xl, xr, yl, yr, dx, dy, out + k * C);
    }
    (void)ny;
  }

  std::vector<Primitive> all_primitives() const {
    const Index n = sys.mesh_.num_cells();
    std::vector<Primitive> out(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)] = primitive_at(i);
    return out;
  }

  Primitive primitive_at(Index cell) const {
    Cons u;
    std::copy(q + cell * C, q + cell * C + C, u.begin());
    return primitive(u, sys.gas_.gamma);
  }

  void full(double* out) const {
    EulerKernel kernel = *this;
    const std::vector<Primitive> cell_prims = all_primitives();
    kernel.prims = cell_prims.data();
    kernel.full_faces(out);
  }

  void full_faces(double* out) const {
    const Mesh& m = sys.mesh_;
    const Index nx = m.cells(0);
    const Index ny = m.cells(1);
    const double dx = m.width(0);
    const double dy = m.width(1);
    std::vector<double> fx(static_cast<std::size_t>((nx + 1) * ny * C));
    for (Index iy = 0; iy < ny; ++iy)
      for (Index f = 0; f <= nx; ++f)
        face_flux(f, iy, 0, fx.data() + (iy * (nx + 1) + f) * C);
    std::vector<double> fy;
    if constexpr (Dim == 2) {
      fy.resize(static_cast<std::size_t>(nx * (ny + 1) * C));
      for (Index f = 0; f <= ny; ++f)
        for (Index ix = 0; ix < nx; ++ix)
          face_flux(ix, f, 1, fy.data() + (f * nx + ix) * C);
    }
    for (Index iy = 0; iy < ny; ++iy) {
      for (Index ix = 0; ix < nx; ++ix) {
        const double* xl = fx.data() + (iy * (nx + 1) + ix) * C;
        const double* yl = nullptr;
        const double* yr = nullptr;
        if constexpr (Dim == 2) {
          yl = fy.data() + (iy * nx + ix) * C;
          yr = fy.data() + ((iy + 1) * nx + ix) * C;
        }
        combine(xl, xl + C, yl, yr, dx, dy, out + m.cell_index(ix, iy) * C);
      }
    }
  }
};

void EulerSystem::rhs(const Eigen::VectorXd& q, double /*t*/, std::span<const Index> cells,
                      double* out) const {
  if (static_cast<Index>(cells.size()) == num_cells()) {
    // Sorted, duplicate-free callers hand over every cell: take the path
    // that evaluates each face once.
    bool identity = true;
    for (std::size_t k = 0; k < cells.size() && identity; ++k)
      identity = cells[k] == static_cast<Index>(k);
    if (identity) {
      if (mesh_.dim() == 1)
        EulerKernel<1>{*this, q.data()}.full(out);
      else
        EulerKernel<2>{*this, q.data()}.full(out);
      return;
    }
  }
  if (mesh_.dim() == 1)
    EulerKernel<1>{*this, q.data()}.subset(cells, out);
  else
    EulerKernel<2>{*this, q.data()}.subset(cells, out);
}

void EulerSystem::rhs(const Eigen::VectorXd& q, double /*t*/, Eigen::VectorXd& out) const {
  out.resize(num_dofs());
  if (mesh_.dim() == 1)
    EulerKernel<1>{*this, q.data()}.full(out.data());
  else
    EulerKernel<2>{*this, q.data()}.full(out.data());
}

} // namespace arom
