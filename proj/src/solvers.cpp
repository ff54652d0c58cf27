#include "pqspectra/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "pqspectra/error.hpp"
#include "pqspectra/format.hpp"
#include "pqspectra/kernels.hpp"
#include "pqspectra/preconditioner.hpp"

namespace pqs {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

std::mt19937_64 sub_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(ss);
}

/// Fills the scalar fields of a report from (u, cfg) alone.
SolveReport finish_report(const ProblemConfig& cfg, std::vector<double> u, const DescentResult* run) {
  SolveReport r;
  r.u = DiscreteFunction(cfg.mesh, std::move(u));
  const GradientAssembly ga = phi_grad(r.u, cfg);
  r.energy = ga.energy;
  r.residual = ga.residual_norm;
  r.relative_residual = ga.relative_residual;
  r.weighted_residual = ga.weighted_residual;
  r.u_norm = m1_norm(r.u, cfg.M());
  r.nontrivial = r.u_norm > cfg.tol.triviality;
  r.case_class = classify_case(cfg);
  if (run) {
    r.iterations = run->iterations;
    r.trace = run->trace;
    r.status = to_string(run->status);
    r.message = run->message;
    r.converged =
        run->status == DescentStatus::Converged && cfg.tol.accepts(r.residual, r.relative_residual);
    if (run->status == DescentStatus::Converged && !r.converged) {
      r.status = "residual_check_failed";
      r.message = "descent stopped on its own residual but the recomputed residual is above tolerance";
    }
  }
  return r;
}

DescentOptions options_from(const ProblemConfig& cfg, int max_iter) {
  DescentOptions o;
  o.tol = cfg.tol;
  o.max_iter = max_iter;
  return o;
}

/// Largest t in {t0, t0/2, ...} with Phi(t*xi) < 0 beyond roundoff, or 0 when none is found.
double negative_scale(const EnergyFunctional& f, std::span<const double> xi, double t0 = 1.0) {
  std::vector<double> v(xi.size()), g(xi.size());
  double t = t0;
  for (int k = 0; k < 60; ++k, t *= 0.5) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = t * xi[i];
    const EnergyEval e = f.evaluate(v, g);
    if (e.energy < -1e-10 * e.magnitude) return t;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Homogeneous-case helpers

void require_homogeneous(const ProblemConfig& cfg, const char* who) {
  if (!cfg.q.is_constant()) throw PreconditionError(std::string(who) + ": q must be constant");
}

struct Homog {
  const MeshDomain* m = nullptr;
  std::vector<double> pc;  // p at cell centroids
  double q = 2.0;
  std::vector<double> aw;  // alpha * node weight
  double lambda = 0.0;
  bool p_const = true;
  int sign = 0;  // -1 when p < q everywhere, +1 when p > q everywhere
};

Homog make_homog(const ProblemConfig& cfg, const char* who) {
  require_homogeneous(cfg, who);
  Homog h;
  h.m = cfg.mesh.get();
  const auto pc = cfg.p.cell_values();
  h.pc.assign(pc.begin(), pc.end());
  h.q = cfg.q.inf();
  const auto w = h.m->node_weights();
  h.aw.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) h.aw[i] = cfg.alpha[i] * w[i];
  h.lambda = cfg.lambda;
  h.p_const = cfg.p.is_constant();
  if (cfg.p.sup() < h.q) h.sign = -1;
  else if (cfg.p.inf() > h.q) h.sign = 1;
  else
    throw PreconditionError(std::string(who) + ": p - q changes sign (p in [" + format_double(cfg.p.inf()) + ", " +
                            format_double(cfg.p.sup()) + "], q = " + format_double(h.q) +
                            "); the Nehari scaling is only defined for sign-definite p - q");
  return h;
}

struct NehariData {
  std::vector<double> ap;  // area |grad u|^{p_c}
  double grad_q = 0.0, mass_q = 0.0;
};

NehariData nehari_data(const Homog& h, std::span<const double> u) {
  const MeshDomain& m = *h.m;
  NehariData d;
  d.ap.resize(m.num_cells());
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& cell = m.cells()[c];
    const auto& b = m.cell_basis()[c];
    double gx = 0.0, gy = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double uk = u[static_cast<std::size_t>(cell[k])];
      gx += uk * b.grad[k][0];
      gy += uk * b.grad[k][1];
    }
    const double mag = std::hypot(gx, gy);
    if (mag > 0.0) {
      d.ap[c] = b.area * std::pow(mag, h.pc[c]);
      d.grad_q += b.area * std::pow(mag, h.q);
    }
  }
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != 0.0) d.mass_q += h.aw[i] * std::pow(std::abs(u[i]), h.q);
  return d;
}

/// Root t of sum_c ap_c t^{p_c - q} = lambda mass - grad_q; nullopt when not projectable.
std::optional<double> nehari_scale(const Homog& h, std::span<const double> u) {
  const NehariData d = nehari_data(h, u);
  const double rhs = h.lambda * d.mass_q - d.grad_q;
  double A = 0.0;
  for (double a : d.ap) A += a;
  if (!(rhs > 0.0) || !(A > 0.0)) return std::nullopt;
  if (h.p_const) {
    const double t = std::pow(rhs / A, 1.0 / (h.pc[0] - h.q));
    return std::isfinite(t) && t > 0.0 ? std::optional<double>(t) : std::nullopt;
  }
  const auto F = [&](double t) {
    double s = 0.0;
    for (std::size_t c = 0; c < d.ap.size(); ++c)
      if (d.ap[c] > 0.0) s += d.ap[c] * std::pow(t, h.pc[c] - h.q);
    return s - rhs;
  };
  // F is decreasing in t when p < q and increasing when p > q.
  const auto above = [&](double t) { return h.sign < 0 ? F(t) > 0.0 : F(t) < 0.0; };  // root lies to the right
  double lo = 1.0, hi = 1.0;
  int guard = 0;
  if (above(1.0)) {
    while (above(hi)) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 2000) return std::nullopt;
    }
  } else {
    while (!above(lo)) {
      hi = lo;
      lo *= 0.5;
      if (++guard > 2000) return std::nullopt;
    }
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    if (above(mid)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double shift_residual(std::span<const double> u, std::span<const double> aw, double q, double s, double& deriv) {
  double g = 0.0, dg = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double z = u[i] - s;
    if (z == 0.0) continue;
    const double az = std::abs(z);
    const double pw = q == 2.0 ? 1.0 : std::pow(az, q - 2.0);
    g += aw[i] * pw * z;
    dg += aw[i] * pw;
  }
  deriv = -(q - 1.0) * dg;
  return g;
}

double project_shift_aw(std::vector<double>& u, std::span<const double> aw, double q) {
  double s;
  if (q == 2.0) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      num += aw[i] * u[i];
      den += aw[i];
    }
    s = num / den;
  } else {
    // G(s) = int alpha |u - s|^{q-2}(u - s) is decreasing with G(min u) >= 0 >= G(max u).
    double lo = *std::min_element(u.begin(), u.end());
    double hi = *std::max_element(u.begin(), u.end());
    if (lo == hi) {
      s = lo;
    } else {
      s = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) s += aw[i] * u[i];
      double wsum = 0.0;
      for (double a : aw) wsum += a;
      s = std::clamp(s / wsum, lo, hi);
      for (int it = 0; it < 200; ++it) {
        double dg = 0.0;
        const double g = shift_residual(u, aw, q, s, dg);
        if (g == 0.0) break;
        if (g > 0.0) lo = s;
        else hi = s;
        double next = dg < 0.0 ? s - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == s || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
          break;
        s = next;
      }
    }
  }
  for (double& x : u) x -= s;
  return s;
}

/// Descent problem for the Rayleigh quotient R = int |grad u|^q / int alpha |u|^q.
struct Rayleigh {
  kernels::PowerFunctional num, den;
  explicit Rayleigh(const ProblemConfig& cfg) {
    const double q = cfg.q.inf();
    num.mesh = den.mesh = cfg.mesh;
    num.epsilon = cfg.epsilon_reg;
    num.gradient_terms.push_back({std::vector<double>(cfg.mesh->num_cells(), q), q, {}});
    kernels::prepare(num);
    kernels::NodalTerm t;
    const auto w = cfg.mesh->node_weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
      t.nodes.push_back(static_cast<int>(i));
      t.exponent.push_back(q);
      t.coefficient.push_back(q * cfg.alpha[i] * w[i]);
    }
    den.nodal_terms.push_back(std::move(t));
  }
  double value(std::span<const double> u) const {
    const double b = kernels::value(den, u);
    return b > 0.0 ? kernels::value(num, u) / b : std::numeric_limits<double>::infinity();
  }
  EnergyEval evaluate(std::span<const double> u, std::span<double> g) const {
    std::vector<double> gb(u.size());
    const double a = kernels::value_and_gradient(num, u, g);
    const double b = kernels::value_and_gradient(den, u, gb);
    EnergyEval e;
    if (!(b > 0.0)) {
      e.energy = std::numeric_limits<double>::infinity();
      return e;
    }
    const double R = a / b;
    const double na = norm2(g), nb = R * norm2(gb);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (g[i] - R * gb[i]) / b;
    e.energy = R;
    e.magnitude = R;
    e.residual = norm2(g);
    const double scale = std::max(na, nb);
    e.relative_residual = scale > 0.0 ? e.residual * b / scale : 0.0;
    return e;
  }
};

std::vector<double> homog_aw(const ProblemConfig& cfg) {
  const auto w = cfg.mesh->node_weights();
  std::vector<double> aw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) aw[i] = cfg.alpha[i] * w[i];
  return aw;
}

void normalize_mass(std::vector<double>& u, std::span<const double> aw, double q) {
  double b = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != 0.0) b += aw[i] * std::pow(std::abs(u[i]), q);
  if (b > 0.0) {
    const double s = std::pow(b, -1.0 / q);
    for (double& x : u) x *= s;
  }
}

// ---------------------------------------------------------------------------
// Reflection classes for the sublinear family

struct ParityClass {
  int sx = 1, sy = 1;  // +1 even, -1 odd under the reflection x -> lx - x (resp. y)
};

bool field_invariant(std::span<const double> v, const std::vector<int>& perm, bool boundary_only,
                     const MeshDomain& m) {
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (boundary_only && !m.is_boundary_node(static_cast<int>(i))) continue;
    if (std::abs(v[i] - v[static_cast<std::size_t>(perm[i])]) > 1e-12 * std::max(scale, 1.0)) return false;
  }
  return true;
}

std::optional<std::vector<int>> data_symmetry(const ProblemConfig& cfg, Axis axis) {
  auto perm = cfg.mesh->reflection(axis);
  if (!perm) return std::nullopt;
  const MeshDomain& m = *cfg.mesh;
  for (const ExponentField* f : {&cfg.p, &cfg.q, &cfg.r})
    if (!field_invariant(f->values(), *perm, false, m)) return std::nullopt;
  if (!field_invariant(cfg.alpha.values(), *perm, false, m)) return std::nullopt;
  for (const WeightField* w : {&cfg.beta1, &cfg.beta2})
    if (!field_invariant(w->values(), *perm, true, m)) return std::nullopt;
  return perm;
}

void apply_parity(std::vector<double>& v, const std::vector<int>& perm, int sign) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = 0.5 * (v[i] + sign * v[static_cast<std::size_t>(perm[i])]);
  v.swap(out);
}

/// Sine bump on the subrectangle [x0,x1]x[y0,y1], zero outside.
std::vector<double> bump(const MeshDomain& m, double x0, double x1, double y0, double y1) {
  std::vector<double> v(m.num_nodes(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& pt = m.nodes()[i];
    if (pt.x <= x0 || pt.x >= x1 || pt.y <= y0 || pt.y >= y1) continue;
    v[i] = std::sin(std::numbers::pi * (pt.x - x0) / (x1 - x0)) * std::sin(std::numbers::pi * (pt.y - y0) / (y1 - y0));
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

SolveReport minimize_descent(const ProblemConfig& cfg, const DiscreteFunction& u0, int max_iter) {
  cfg.validate();
  if (!u0.mesh || !u0.mesh->same_as(*cfg.mesh)) throw MeshMismatch("minimize_descent: u0 not on the config mesh");
  const EnergyFunctional f(cfg);
  const H1Preconditioner H(*cfg.mesh, 1.0);
  std::vector<double> start = u0.values;
  std::string note;
  if (m1_norm(u0, cfg.M()) <= cfg.tol.triviality) {
    const std::vector<double> one(start.size(), 1.0);
    const double t = negative_scale(f, one);
    if (t > 0.0) {
      start = one;
      for (double& x : start) x *= t;
      note = "trivial start replaced by " + format_double(t) + "*1";
    }
  }
  const DescentResult run = descend(energy_problem(f), std::move(start), H, options_from(cfg, max_iter));
  SolveReport r = finish_report(cfg, run.u, &run);
  if (!note.empty()) r.message = note + "; " + r.message;
  return r;
}

std::vector<DiscreteFunction> disjoint_support_seeds(const MeshPtr& mesh, int k, double amplitude) {
  if (k < 1) throw ValidationError("disjoint_support_seeds: k must be >= 1");
  const MeshDomain& m = *mesh;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
  const int rows = (k + cols - 1) / cols;
  if (m.nx() / cols < 2 || m.ny() / rows < 2) {
    std::ostringstream os;
    os << "disjoint_support_seeds: k = " << k << " needs a " << cols << "x" << rows
       << " grid of subrectangles at least 2 cells wide, mesh is " << m.nx() << "x" << m.ny();
    throw ValidationError(os.str());
  }
  const double hx = m.lx() / m.nx(), hy = m.ly() / m.ny();
  std::vector<DiscreteFunction> out;
  for (int j = 0; j < k; ++j) {
    const int cx = j % cols, cy = j / cols;
    const int i0 = cx * m.nx() / cols, i1 = (cx + 1) * m.nx() / cols;
    const int j0 = cy * m.ny() / rows, j1 = (cy + 1) * m.ny() / rows;
    auto v = bump(m, i0 * hx, i1 * hx, j0 * hy, j1 * hy);
    for (double& x : v) x *= amplitude;
    out.emplace_back(mesh, std::move(v));
  }
  return out;
}

std::vector<SolveReport> solve_sublinear_family(const ProblemConfig& cfg, int k, const FamilyOptions& opt) {
  cfg.validate();
  if (k < 1) throw ValidationError("solve_sublinear_family: k must be >= 1");
  const CaseClass cc = classify_case(cfg);
  if (cc.tag != CaseTag::SublinearA)
    throw PreconditionError("solve_sublinear_family: requires the Sublinear-A case, got " + to_string(cc.tag));
  const MeshDomain& m = *cfg.mesh;
  const EnergyFunctional f(cfg);
  const H1Preconditioner H(m, 1.0);
  const auto px = data_symmetry(cfg, Axis::X);
  const auto py = data_symmetry(cfg, Axis::Y);
  const double lx = m.lx(), ly = m.ly();

  // Parity class j and its seed as a signed combination of disjoint bumps.
  const std::vector<ParityClass> classes{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  std::vector<SolveReport> found;
  for (int j = 0; j < k; ++j) {
    const double amp = opt.amplitude * std::pow(2.0, -j);
    std::vector<double> seed(m.num_nodes(), 0.0);
    std::optional<ParityClass> cls;
    const auto add = [&](double s, double x0, double x1, double y0, double y1) {
      const auto b = bump(m, x0, x1, y0, y1);
      for (std::size_t i = 0; i < seed.size(); ++i) seed[i] += s * amp * b[i];
    };
    if (j < 4) {
      cls = classes[static_cast<std::size_t>(j)];
      if ((cls->sx < 0 && !px) || (cls->sy < 0 && !py)) cls.reset();
    }
    const ParityClass pc = cls.value_or(ParityClass{});
    if (j >= 4 || !cls) {
      // No symmetric class left: alternating signs over j+1 disjoint bumps.
      const auto bumps = disjoint_support_seeds(cfg.mesh, j + 1, amp);
      for (std::size_t b = 0; b < bumps.size(); ++b)
        for (std::size_t i = 0; i < seed.size(); ++i) seed[i] += (b % 2 ? -1.0 : 1.0) * bumps[b][i];
    } else if (pc.sx > 0 && pc.sy > 0) {
      add(1.0, 0.0, lx, 0.0, ly);
    } else if (pc.sx < 0 && pc.sy > 0) {
      add(1.0, 0.0, lx / 2, 0.0, ly);
      add(-1.0, lx / 2, lx, 0.0, ly);
    } else if (pc.sx < 0 && pc.sy < 0) {
      add(1.0, 0.0, lx / 2, 0.0, ly / 2);
      add(-1.0, lx / 2, lx, 0.0, ly / 2);
      add(-1.0, 0.0, lx / 2, ly / 2, ly);
      add(1.0, lx / 2, lx, ly / 2, ly);
    } else {
      add(1.0, 0.0, lx, 0.0, ly / 2);
      add(-1.0, 0.0, lx, ly / 2, ly);
    }

    DescentProblem prob = energy_problem(f);
    if (cls) {
      prob.filter = [&, pc](std::vector<double>& d) {
        if (px) apply_parity(d, *px, pc.sx);
        if (py) apply_parity(d, *py, pc.sy);
      };
      prob.filter(seed);
    }
    const DescentResult run = descend(prob, seed, H, options_from(cfg, cfg.tol.max_iter));
    SolveReport r = finish_report(cfg, run.u, &run);
    r.seed = j;
    if (!r.found() || r.energy > 0.0) continue;
    bool duplicate = false;
    for (auto& prev : found) {
      double dist = 0.0;
      for (std::size_t i = 0; i < r.u.size(); ++i) dist = std::max(dist, std::abs(r.u[i] - prev.u[i]));
      if (dist < opt.dedup_distance) {
        duplicate = true;
        if (r.residual < prev.residual) prev = r;
        break;
      }
    }
    if (!duplicate) found.push_back(std::move(r));
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const SolveReport& a, const SolveReport& b) { return a.u_norm > b.u_norm; });
  return found;
}

BallResult minimize_in_ball(const ProblemConfig& cfg, const ThresholdReport& thresholds, int sphere_samples,
                            std::uint64_t seed) {
  cfg.validate();
  const CaseClass cc = classify_case(cfg);
  if (cc.tag != CaseTag::SmallLambdaB)
    throw PreconditionError("minimize_in_ball: requires the SmallLambda-B case, got " + to_string(cc.tag));
  const double rho = thresholds.rho;
  const double cs = thresholds.c_star_lower;
  if (!(rho > 0.0) || !(rho < std::min(1.0 / cs, 1.0)))
    throw ValidationError("minimize_in_ball: rho must lie in (0, min{1/C*, 1})");
  const ExponentField M = cfg.M();
  const WeightField one_b = unit_boundary_weight(cfg.mesh);
  const EnergyFunctional f(cfg);
  const H1Preconditioner H(*cfg.mesh, 1.0);

  BallResult out;
  out.rho = rho;
  out.energy_lower_bound = -cfg.lambda * cfg.alpha.sup() * std::pow(cs * rho, cfg.r.inf()) / cfg.r.inf();

  const auto norm_of = [&](std::span<const double> v) {
    return sobolev_beta_norm(DiscreteFunction(cfg.mesh, {v.begin(), v.end()}), M, one_b);
  };
  const std::vector<double> one(cfg.mesh->num_nodes(), 1.0);
  const double t = negative_scale(f, one, 0.5 * rho / norm_of(one));
  if (!(t > 0.0)) throw PreconditionError("minimize_in_ball: no t > 0 with Phi(t*1) < 0 inside the ball");
  std::vector<double> start(one.size(), t);

  DescentProblem prob = energy_problem(f);
  prob.retract = [&](std::vector<double>& v) {
    const double n = norm_of(v);
    if (n > rho) {
      const double s = rho / n;
      for (double& x : v) x *= s;
    }
    return true;
  };
  const DescentResult run = descend(prob, std::move(start), H, options_from(cfg, cfg.tol.max_iter));
  out.report = finish_report(cfg, run.u, &run);
  const double un = norm_of(out.report.u.values);
  out.interior = un < rho * (1.0 - 1e-6);
  if (!out.interior) {
    out.report.converged = false;
    out.report.status = "geometry_violation";
    out.report.message = "minimizer lies on the sphere ||u||_{M,1} = rho: lambda too large or C* underestimated";
  }

  auto rng = sub_rng(seed, 0x5ef7e);
  for (int k = 0; k < sphere_samples; ++k) {
    DiscreteFunction v = random_cosine_field(cfg.mesh, rng, 3, true);
    const double n = norm_of(v.values);
    for (double& x : v.values) x *= rho / n;
    out.sphere_energies.push_back(f.value(v.values));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mountain pass

namespace {

/// Maximum of Phi along the ray t*v, t > 0, via bisection on <Phi'(t v), v>.
bool ray_maximize(const EnergyFunctional& f, std::vector<double>& v) {
  std::vector<double> tv(v.size()), g(v.size());
  const auto slope = [&](double t) {
    for (std::size_t i = 0; i < v.size(); ++i) tv[i] = t * v[i];
    f.evaluate(tv, g);
    return dot(g, v);
  };
  double lo = 1.0, hi = 1.0;
  double s = slope(1.0);
  if (!std::isfinite(s)) return false;
  int guard = 0;
  if (s > 0.0) {
    while (s > 0.0) {
      lo = hi;
      hi *= 2.0;
      s = slope(hi);
      if (!std::isfinite(s) || ++guard > 200) return false;
    }
  } else {
    while (!(s > 0.0)) {
      hi = lo;
      lo *= 0.5;
      s = slope(lo);
      if (!std::isfinite(s) || ++guard > 200) return false;
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    if (slope(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  const double t = 0.5 * (lo + hi);
  for (double& x : v) x *= t;
  return true;
}

void reparameterize(std::vector<std::vector<double>>& path) {
  const std::size_t P = path.size();
  std::vector<double> s(P, 0.0);
  for (std::size_t i = 1; i < P; ++i) {
    double d = 0.0;
    for (std::size_t k = 0; k < path[i].size(); ++k) d += (path[i][k] - path[i - 1][k]) * (path[i][k] - path[i - 1][k]);
    s[i] = s[i - 1] + std::sqrt(d);
  }
  if (!(s.back() > 0.0)) return;
  std::vector<std::vector<double>> out(P);
  out.front() = path.front();
  out.back() = path.back();
  std::size_t seg = 1;
  for (std::size_t j = 1; j + 1 < P; ++j) {
    const double target = s.back() * static_cast<double>(j) / static_cast<double>(P - 1);
    while (seg + 1 < P && s[seg] < target) ++seg;
    const double len = s[seg] - s[seg - 1];
    const double w = len > 0.0 ? (target - s[seg - 1]) / len : 0.0;
    out[j].resize(path[0].size());
    for (std::size_t k = 0; k < out[j].size(); ++k) out[j][k] = (1.0 - w) * path[seg - 1][k] + w * path[seg][k];
  }
  path.swap(out);
}

}  // namespace

SphereLevel sample_sphere_level(const ProblemConfig& cfg, int c_star_probes, int samples, std::uint64_t seed) {
  cfg.validate();
  if (samples < 1) throw ValidationError("sample_sphere_level: samples must be >= 1");
  const EnergyFunctional f(cfg);
  const ExponentField M = cfg.M();
  SphereLevel out;
  out.c_star_lower = estimate_c_star(cfg, c_star_probes, seed).c_star_lower;
  out.eta = 0.5 * std::min(1.0 / out.c_star_lower, 1.0);
  // Same sample directions for every radius; shrink eta until all energies are positive.
  auto rng = sub_rng(seed, 0xb0b);
  std::vector<DiscreteFunction> dirs;
  for (int k = 0; k < samples; ++k) {
    DiscreteFunction v = random_cosine_field(cfg.mesh, rng, 3, true);
    const double nv = m1_norm(v, M);
    for (double& x : v.values) x /= nv;
    dirs.push_back(std::move(v));
  }
  for (; out.halvings < 40; ++out.halvings, out.eta *= 0.5) {
    out.b = std::numeric_limits<double>::infinity();
    for (const auto& d : dirs) out.b = std::min(out.b, f.value(d.scaled(out.eta).values));
    if (out.b > 0.0) return out;
  }
  throw PreconditionError("sample_sphere_level: no radius with positive sampled energy");
}

DiscreteFunction mountain_pass_endpoint(const ProblemConfig& cfg, double eta) {
  const EnergyFunctional f(cfg);
  const ExponentField M = cfg.M();
  for (int k = 0; k < 64; ++k) {
    const double t = std::ldexp(1.0, k);
    DiscreteFunction z = DiscreteFunction::constant(cfg.mesh, t);
    if (f.value(z.values) < 0.0 && m1_norm(z, M) > eta) return z;
  }
  throw PreconditionError("mountain_pass_endpoint: Phi(t*1) stays nonnegative for t up to 2^63");
}

MountainPassResult mountain_pass(const ProblemConfig& cfg, const DiscreteFunction& zeta, int path_points,
                                 const MountainPassOptions& opt) {
  cfg.validate();
  const CaseClass cc = classify_case(cfg);
  if (cc.tag != CaseTag::SuperlinearC)
    throw PreconditionError("mountain_pass: requires the Superlinear-C case, got " + to_string(cc.tag));
  if (path_points < 3) throw ValidationError("mountain_pass: path_points must be >= 3");
  if (!zeta.mesh || !zeta.mesh->same_as(*cfg.mesh)) throw MeshMismatch("mountain_pass: zeta not on the config mesh");
  const EnergyFunctional f(cfg);
  const H1Preconditioner H(*cfg.mesh, 1.0);
  const ExponentField M = cfg.M();
  const std::size_t n = cfg.mesh->num_nodes();

  MountainPassResult out;
  const SphereLevel level = sample_sphere_level(cfg, opt.c_star_probes, opt.sphere_samples, opt.seed);
  out.c_star_lower = level.c_star_lower;
  out.eta = level.eta;
  out.b = level.b;
  if (!(f.value(zeta.values) < 0.0)) throw PreconditionError("mountain_pass: Phi(zeta) must be negative");
  if (!(m1_norm(zeta, M) > out.eta)) throw PreconditionError("mountain_pass: ||zeta||_{M,1} must exceed eta");

  const auto P = static_cast<std::size_t>(path_points);
  auto& path = out.path;
  path.assign(P, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < P; ++i)
    for (std::size_t k = 0; k < n; ++k) path[i][k] = zeta[k] * static_cast<double>(i) / static_cast<double>(P - 1);
  const std::vector<double> zeta_v = zeta.values;
  std::vector<double> E(P);
  for (std::size_t i = 0; i < P; ++i) E[i] = f.value(path[i]);

  std::vector<double> g(n), d(n), trial(n);
  std::vector<double> steps(P, 1.0);
  std::vector<TraceRow> trace;
  std::size_t imax = 1;
  int it = 0;
  for (; it < opt.max_path_iter; ++it) {
    imax = 1;
    for (std::size_t i = 1; i + 1 < P; ++i)
      if (E[i] > E[imax]) imax = i;
    if (!(E[imax] > 0.0)) throw ConvergenceError("mountain_pass: path collapsed (max energy <= 0)");
    const EnergyEval e = f.evaluate(path[imax], g);
    trace.push_back({it, E[imax], e.residual});
    if (e.relative_residual < opt.switch_relative_residual) break;
    H.solve(g, d);
    const double gd = dot(g, d);
    // Keep the string connected: the moved node may not travel further than half its shorter link.
    double link = std::numeric_limits<double>::infinity();
    for (std::size_t nb : {imax - 1, imax + 1}) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = path[nb][i] - path[imax][i];
      link = std::min(link, std::sqrt(H.inner(trial, trial)));
    }
    double t = std::min(steps[imax], 0.5 * link / std::sqrt(gd));
    bool ok = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = path[imax][i] - t * d[i];
      const double et = f.value(trial);
      if (std::isfinite(et) && et <= E[imax] - cfg.tol.armijo_c1 * t * gd) {
        path[imax] = trial;
        E[imax] = et;
        ok = true;
        break;
      }
    }
    steps[imax] = ok ? 2.0 * t : steps[imax] * 0.5;
    if ((it + 1) % opt.reparam_every == 0) {
      reparameterize(path);
      for (std::size_t i = 1; i + 1 < P; ++i) E[i] = f.value(path[i]);
      std::fill(steps.begin(), steps.end(), 1.0);
    }
    for (std::size_t k = 0; k < n; ++k)
      if (path.front()[k] != 0.0 || path.back()[k] != zeta_v[k]) out.endpoints_preserved = false;
  }
  out.path_iterations = it;
  out.path_max = *std::max_element(E.begin() + 1, E.end() - 1);

  // Polish: descent with iterates held at the maximum along their ray.
  std::vector<double> start = path[imax];
  DescentProblem prob = energy_problem(f);
  prob.retract = [&](std::vector<double>& v) { return ray_maximize(f, v); };
  const DescentResult run = descend(prob, std::move(start), H, options_from(cfg, cfg.tol.max_iter));
  out.report = finish_report(cfg, run.u, &run);
  std::vector<TraceRow> full = trace;
  for (auto row : out.report.trace) {
    row.iter += it;
    full.push_back(row);
  }
  out.report.trace = std::move(full);
  out.report.iterations += it;
  const GradientAssembly ga = phi_grad(out.report.u, cfg);
  out.nehari_residual = std::abs(dot(ga.nodal_covector, out.report.u.values));
  if (out.report.converged && out.report.energy < out.b) {
    out.report.status = "below_sphere_level";
    out.report.message = "critical point found below the sampled sphere level b";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Homogeneous cases

double nehari_project(const DiscreteFunction& u, const ProblemConfig& cfg) {
  const Homog h = make_homog(cfg, "nehari_project");
  if (!u.mesh || !u.mesh->same_as(*cfg.mesh)) throw MeshMismatch("nehari_project: u not on the config mesh");
  const auto t = nehari_scale(h, u.values);
  if (!t) {
    const NehariData d = nehari_data(h, u.values);
    std::ostringstream os;
    os << "nehari_project: below threshold, lambda int alpha|u|^q = " << format_double(h.lambda * d.mass_q)
       << " does not exceed int |grad u|^q = " << format_double(d.grad_q);
    throw PreconditionError(os.str());
  }
  return *t;
}

double project_shift(std::vector<double>& u, const MeshDomain& m, const WeightField& alpha, double q) {
  if (u.size() != m.num_nodes() || alpha.values().size() != u.size())
    throw MeshMismatch("project_shift: size mismatch");
  const auto w = m.node_weights();
  std::vector<double> aw(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) aw[i] = alpha[i] * w[i];
  return project_shift_aw(u, aw, q);
}

LagrangeResiduals lagrange_residuals(const DiscreteFunction& u, const ProblemConfig& cfg) {
  require_homogeneous(cfg, "lagrange_residuals");
  const MeshDomain& m = *cfg.mesh;
  const double q = cfg.q.inf();
  const GradientAssembly ga = phi_grad(u, cfg);
  const auto& g = ga.nodal_covector;
  const std::vector<double> g2 = constraint_G2_gradient(u, cfg.alpha, q);

  // G1' = p |grad u|^{p-2} grad u + q |grad u|^{q-2} grad u - lambda q alpha |u|^{q-2} u
  std::vector<double> g1(u.size(), 0.0);
  const auto pc = cfg.p.cell_values();
  const auto grads = u.gradients();
  LagrangeResiduals out;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const double mag = std::hypot(grads[c][0], grads[c][1]);
    if (mag == 0.0) continue;
    const auto& b = m.cell_basis()[c];
    const double fac = b.area * (pc[c] * std::pow(mag, pc[c] - 2.0) + q * std::pow(mag, q - 2.0));
    for (std::size_t k = 0; k < 3; ++k)
      g1[static_cast<std::size_t>(m.cells()[c][k])] += fac * (grads[c][0] * b.grad[k][0] + grads[c][1] * b.grad[k][1]);
    out.a_coefficient += b.area * (pc[c] - q) * std::pow(mag, pc[c]);
  }
  const auto w = m.node_weights();
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != 0.0) g1[i] -= cfg.lambda * q * cfg.alpha[i] * w[i] * std::pow(std::abs(u[i]), q - 2.0) * u[i];
  for (double x : g2) out.b_coefficient += x;  // (q-1) int alpha |u|^{q-2}

  const double scale = norm2(g1) + norm2(g2);
  if (!(std::abs(out.b_coefficient) > 1e-300) || !(std::abs(out.a_coefficient) > 1e-300))
    throw PreconditionError("lagrange_residuals: singular multiplier system (int alpha|u|^{q-2} or "
                            "int (p-q)|grad u|^p vanishes)");
  double g_one = 0.0;
  for (double x : g) g_one += x;
  out.d_test = -g_one / out.b_coefficient;
  out.c_test = -dot(g, u.values) / out.a_coefficient;

  // Least squares on [G1' G2'] [c d]^T = -Phi'.
  const double a11 = dot(g1, g1), a12 = dot(g1, g2), a22 = dot(g2, g2);
  const double r1 = -dot(g1, g), r2 = -dot(g2, g);
  const double det = a11 * a22 - a12 * a12;
  if (!(std::abs(det) > 1e-14 * a11 * a22) || !(scale > 0.0))
    throw PreconditionError("lagrange_residuals: singular normal matrix");
  out.c = (r1 * a22 - r2 * a12) / det;
  out.d = (a11 * r2 - a12 * r1) / det;
  std::vector<double> res(g);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] += out.c * g1[i] + out.d * g2[i];
  out.stationarity = norm2(res);
  return out;
}

double SigmaEstimate::spread() const {
  if (samples.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  return *hi - *lo;
}

SigmaEstimate sigma_threshold(const ProblemConfig& cfg, ConstraintSpace, int restarts, std::uint64_t seed) {
  cfg.validate();
  require_homogeneous(cfg, "sigma_threshold");
  if (restarts < 1) throw ValidationError("sigma_threshold: restarts must be >= 1");
  const double q = cfg.q.inf();
  const Rayleigh R(cfg);
  const auto aw = homog_aw(cfg);
  const H1Preconditioner H(*cfg.mesh, 1.0);

  DescentProblem prob;
  prob.evaluate = [&](std::span<const double> u, std::span<double> g) { return R.evaluate(u, g); };
  prob.value = [&](std::span<const double> u) { return R.value(u); };
  prob.retract = [&](std::vector<double>& v) {
    project_shift_aw(v, aw, q);
    normalize_mass(v, aw, q);
    double b = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) b += aw[i] * std::pow(std::abs(v[i]), q);
    return b > 0.0 && std::isfinite(b);
  };
  DescentOptions o = options_from(cfg, cfg.tol.max_iter);

  SigmaEstimate out;
  out.value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < restarts; ++k) {
    auto rng = sub_rng(seed, static_cast<std::uint64_t>(k));
    DiscreteFunction u0 = random_cosine_field(cfg.mesh, rng, 3, false);
    const DescentResult run = descend(prob, u0.values, H, o);
    if (run.status == DescentStatus::Infeasible || !std::isfinite(run.eval.energy)) {
      out.samples.push_back(std::numeric_limits<double>::infinity());
      out.minimizers.push_back(DiscreteFunction::zeros(cfg.mesh));
      out.status.push_back(to_string(run.status));
      continue;
    }
    out.samples.push_back(run.eval.energy);
    out.minimizers.emplace_back(cfg.mesh, run.u);
    out.status.push_back(to_string(run.status));
    out.value = std::min(out.value, run.eval.energy);
  }
  if (!std::isfinite(out.value)) throw ConvergenceError("sigma_threshold: every restart was infeasible");
  return out;
}

namespace {

std::vector<std::size_t> order_by_quotient(const SigmaEstimate& s) {
  std::vector<std::size_t> idx(s.samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.samples[a] < s.samples[b]; });
  return idx;
}

SolveReport below_threshold(const ProblemConfig& cfg, const std::string& why) {
  SolveReport r = finish_report(cfg, std::vector<double>(cfg.mesh->num_nodes(), 0.0), nullptr);
  r.status = "below_threshold";
  r.message = why;
  return r;
}

bool better(const SolveReport& a, const SolveReport& b) {
  if (a.found() != b.found()) return a.found();
  return a.energy < b.energy;
}

}  // namespace

SolveReport nehari_minimize(const ProblemConfig& cfg, int restarts, std::uint64_t seed) {
  cfg.validate();
  const CaseClass cc = classify_case(cfg);
  if (cc.tag != CaseTag::HomogeneousPPlusLtQ)
    throw PreconditionError("nehari_minimize: requires the Homogeneous-pPlusLtQ case, got " + to_string(cc.tag));
  return nehari_minimize(cfg, sigma_threshold(cfg, ConstraintSpace::Cq, restarts, seed));
}

SolveReport nehari_minimize(const ProblemConfig& cfg, const SigmaEstimate& starts) {
  cfg.validate();
  const Homog h = make_homog(cfg, "nehari_minimize");
  if (h.sign >= 0) throw PreconditionError("nehari_minimize: requires p+ < q");
  const auto aw = homog_aw(cfg);
  const EnergyFunctional f(cfg);
  const H1Preconditioner H(*cfg.mesh, 1.0);
  DescentProblem prob = energy_problem(f);
  prob.retract = [&](std::vector<double>& v) {
    project_shift_aw(v, aw, h.q);
    const auto t = nehari_scale(h, v);
    if (!t) return false;
    for (double& x : v) x *= *t;
    return true;
  };

  std::optional<SolveReport> best;
  for (std::size_t k : order_by_quotient(starts)) {
    if (!(starts.samples[k] < cfg.lambda)) continue;
    std::vector<double> u0 = starts.minimizers[k].values;
    const DescentResult run = descend(prob, std::move(u0), H, options_from(cfg, cfg.tol.max_iter));
    if (run.status == DescentStatus::Infeasible) continue;
    SolveReport r = finish_report(cfg, run.u, &run);
    r.seed = static_cast<int>(k);
    try {
      const LagrangeResiduals lr = lagrange_residuals(r.u, cfg);
      r.c = lr.c;
      r.d = lr.d;
      r.stationarity = lr.stationarity;
    } catch (const PreconditionError& e) {
      r.message += std::string("; ") + e.what();
    }
    if (!best || better(r, *best)) best = std::move(r);
  }
  if (!best)
    return below_threshold(cfg, "no start is projectable onto the Nehari set: lambda = " + format_double(cfg.lambda) +
                                    " does not exceed the Rayleigh quotient of any start (sigma estimate " +
                                    format_double(starts.value) + ")");
  return *best;
}

SolveReport constrained_global_minimize(const ProblemConfig& cfg, std::uint64_t seed, int restarts) {
  cfg.validate();
  const CaseClass cc = classify_case(cfg);
  if (cc.tag != CaseTag::HomogeneousQLtPMinus)
    throw PreconditionError("constrained_global_minimize: requires the Homogeneous-qLtPMinus case, got " +
                            to_string(cc.tag));
  return constrained_global_minimize(cfg, sigma_threshold(cfg, ConstraintSpace::C, restarts, seed));
}

SolveReport constrained_global_minimize(const ProblemConfig& cfg, const SigmaEstimate& starts) {
  cfg.validate();
  const Homog h = make_homog(cfg, "constrained_global_minimize");
  if (h.sign <= 0) throw PreconditionError("constrained_global_minimize: requires q < p-");
  const auto aw = homog_aw(cfg);
  const EnergyFunctional f(cfg);
  const H1Preconditioner H(*cfg.mesh, 1.0);
  DescentProblem prob = energy_problem(f);
  prob.retract = [&](std::vector<double>& v) {
    project_shift_aw(v, aw, h.q);
    return true;
  };

  std::optional<SolveReport> best;
  for (std::size_t k : order_by_quotient(starts)) {
    std::vector<double> u0 = starts.minimizers[k].values;
    int max_iter = cfg.tol.max_iter;
    // Phi(t w) < 0 for small t exactly when the q-quotient of w is below lambda.
    const double t = starts.samples[k] < cfg.lambda ? negative_scale(f, u0) : 0.0;
    if (t > 0.0) {
      for (double& x : u0) x *= t;
    } else {
      // No negative ray: descend from w itself and watch it decay.
      max_iter = std::min(max_iter, 2000);
    }
    const DescentResult run = descend(prob, std::move(u0), H, options_from(cfg, max_iter));
    SolveReport r = finish_report(cfg, run.u, &run);
    r.seed = static_cast<int>(k);
    const std::vector<double> g2 = constraint_G2_gradient(r.u, cfg.alpha, h.q);
    const GradientAssembly ga = phi_grad(r.u, cfg);
    double bsum = 0.0, g1 = 0.0;
    for (std::size_t i = 0; i < g2.size(); ++i) {
      bsum += g2[i];
      g1 += ga.nodal_covector[i];
    }
    if (bsum > 0.0) {
      r.a = -g1 / bsum;
      const double a_ls = -dot(ga.nodal_covector, g2) / dot(g2, g2);
      std::vector<double> res(ga.nodal_covector);
      for (std::size_t i = 0; i < res.size(); ++i) res[i] += a_ls * g2[i];
      r.stationarity = norm2(res);
    }
    if (!best || better(r, *best)) best = std::move(r);
  }
  if (!best) return below_threshold(cfg, "no start available");
  if (!(best->energy < 0.0) && best->found()) {
    best->status = "nonnegative_energy";
    best->message = "converged to a nontrivial point with Phi >= 0";
  }
  return *best;
}

// ---------------------------------------------------------------------------

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (n < 1) throw ValidationError("geometric_grid: need at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("geometric_grid: need 0 < lo <= hi");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double r = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo * std::exp(r * i);
  out.back() = hi;
  return out;
}

}  // namespace pqs
