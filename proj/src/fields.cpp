#include "pqspectra/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pqspectra/error.hpp"

namespace pqs {

namespace {

std::vector<double> sample_nodes(const MeshDomain& m, const Expression& expr) {
  std::vector<double> v;
  v.reserve(m.num_nodes());
  for (const auto& pt : m.nodes()) v.push_back(expr(pt.x, pt.y));
  return v;
}

void check_size(const MeshPtr& mesh, std::size_t n, const char* what) {
  if (!mesh) throw ValidationError(std::string(what) + ": null mesh");
  if (n != mesh->num_nodes()) {
    std::ostringstream os;
    os << what << ": expected " << mesh->num_nodes() << " nodal values, got " << n;
    throw MeshMismatch(os.str());
  }
}

std::string node_label(const MeshDomain& m, std::size_t i) {
  std::ostringstream os;
  os << "node " << i << " (" << m.nodes()[i].x << ", " << m.nodes()[i].y << ")";
  return os.str();
}

}  // namespace

ExponentField make_exponent(MeshPtr mesh, std::vector<double> values) {
  check_size(mesh, values.size(), "make_exponent");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw ValidationError("make_exponent: non-finite exponent at " + node_label(*mesh, i));
    if (!(values[i] > 1.0)) {
      std::ostringstream os;
      os << "make_exponent: C+ violation, exponent " << values[i] << " <= 1 at " << node_label(*mesh, i);
      throw ValidationError(os.str());
    }
  }
  ExponentField f;
  f.mesh_ = std::move(mesh);
  f.values_ = std::move(values);
  const auto [lo, hi] = std::minmax_element(f.values_.begin(), f.values_.end());
  f.inf_ = *lo;
  f.sup_ = *hi;
  f.cell_values_.reserve(f.mesh_->num_cells());
  for (const auto& c : f.mesh_->cells())
    f.cell_values_.push_back((f.values_[static_cast<std::size_t>(c[0])] + f.values_[static_cast<std::size_t>(c[1])] +
                              f.values_[static_cast<std::size_t>(c[2])]) /
                             3.0);
  return f;
}

ExponentField make_exponent(MeshPtr mesh, const Expression& expr) {
  auto v = sample_nodes(*mesh, expr);
  return make_exponent(std::move(mesh), std::move(v));
}

ExponentField constant_exponent(MeshPtr mesh, double value) {
  const std::size_t n = mesh->num_nodes();
  return make_exponent(std::move(mesh), std::vector<double>(n, value));
}

WeightField make_volume_weight(MeshPtr mesh, std::vector<double> values) {
  check_size(mesh, values.size(), "make_volume_weight");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw ValidationError("make_volume_weight: non-finite weight at " + node_label(*mesh, i));
  }
  WeightField w;
  w.support_ = Support::Volume;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  w.inf_ = *lo;
  w.sup_ = *hi;
  if (!(w.inf_ > 0.0)) {
    std::ostringstream os;
    os << "make_volume_weight: alpha^- = " << w.inf_ << " must be positive";
    throw ValidationError(os.str());
  }
  w.mesh_ = std::move(mesh);
  w.values_ = std::move(values);
  return w;
}

WeightField make_boundary_weight(MeshPtr mesh, std::vector<double> values) {
  check_size(mesh, values.size(), "make_boundary_weight");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mesh->is_boundary_node(static_cast<int>(i))) continue;
    if (!std::isfinite(values[i]))
      throw ValidationError("make_boundary_weight: non-finite weight at " + node_label(*mesh, i));
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  if (lo < 0.0 || (lo == 0.0 && hi != 0.0)) {
    std::ostringstream os;
    os << "make_boundary_weight: boundary weight must be positive everywhere or identically zero (range [" << lo
       << ", " << hi << "])";
    throw ValidationError(os.str());
  }
  WeightField w;
  w.support_ = Support::Boundary;
  w.inf_ = lo;
  w.sup_ = hi;
  w.mesh_ = std::move(mesh);
  w.values_ = std::move(values);
  return w;
}

WeightField make_volume_weight(MeshPtr mesh, const Expression& expr) {
  auto v = sample_nodes(*mesh, expr);
  return make_volume_weight(std::move(mesh), std::move(v));
}

WeightField make_boundary_weight(MeshPtr mesh, const Expression& expr) {
  auto v = sample_nodes(*mesh, expr);
  return make_boundary_weight(std::move(mesh), std::move(v));
}

ExponentField pointwise_max_exponent(const ExponentField& p, const ExponentField& q) {
  if (!p.mesh() || !q.mesh() || !p.mesh()->same_as(*q.mesh()))
    throw MeshMismatch("pointwise_max_exponent: exponents live on different meshes");
  std::vector<double> m(p.values().size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::max(p[i], q[i]);
  return make_exponent(p.mesh(), std::move(m));
}

CriticalExponent critical_exponent(const ExponentField& m, int dimension) {
  if (dimension < 2) throw ValidationError("critical_exponent: dimension must be >= 2");
  const double n = dimension;
  CriticalExponent ce;
  ce.values.reserve(m.values().size());
  ce.inf = std::numeric_limits<double>::infinity();
  for (double v : m.values()) {
    const double s = v < n ? n * v / (n - v) : std::numeric_limits<double>::infinity();
    ce.values.push_back(s);
    ce.inf = std::min(ce.inf, s);
  }
  return ce;
}

void ProblemConfig::validate() const {
  if (!mesh) throw ValidationError("ProblemConfig: missing mesh");
  for (const ExponentField* f : {&p, &q, &r})
    if (f->empty() || !f->mesh()->same_as(*mesh)) throw MeshMismatch("ProblemConfig: exponent not on config mesh");
  for (const WeightField* w : {&alpha, &beta1, &beta2})
    if (w->empty() || !w->mesh()->same_as(*mesh)) throw MeshMismatch("ProblemConfig: weight not on config mesh");
  if (alpha.support() != Support::Volume) throw ValidationError("ProblemConfig: alpha must be a volume weight");
  if (beta1.support() != Support::Boundary || beta2.support() != Support::Boundary)
    throw ValidationError("ProblemConfig: beta1/beta2 must be boundary weights");
  if (!(robin() || neumann()))
    throw ValidationError("ProblemConfig: beta1 and beta2 must both be positive or both identically zero");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("ProblemConfig: lambda must be >= 0");
  if (!(epsilon_reg >= 0.0)) throw ValidationError("ProblemConfig: epsilon_reg must be >= 0");
  if (dimension < 2) throw ValidationError("ProblemConfig: dimension must be >= 2");
}

std::string to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::SublinearA: return "Sublinear-A";
    case CaseTag::SmallLambdaB: return "SmallLambda-B";
    case CaseTag::SuperlinearC: return "Superlinear-C";
    case CaseTag::HomogeneousPPlusLtQ: return "Homogeneous-pPlusLtQ";
    case CaseTag::HomogeneousQLtPMinus: return "Homogeneous-qLtPMinus";
    case CaseTag::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

CaseTag case_from_string(const std::string& s) {
  for (CaseTag t : {CaseTag::SublinearA, CaseTag::SmallLambdaB, CaseTag::SuperlinearC, CaseTag::HomogeneousPPlusLtQ,
                    CaseTag::HomogeneousQLtPMinus, CaseTag::Unclassified})
    if (to_string(t) == s) return t;
  throw ValidationError("unknown case tag '" + s + "'");
}

CaseClass classify_case(const ProblemConfig& cfg) {
  const ExponentField m = cfg.M();
  const double mstar = critical_exponent(m, cfg.dimension).inf;
  const double minpq = std::min(cfg.p.inf(), cfg.q.inf());
  const double rm = cfg.r.inf(), rp = cfg.r.sup();

  CaseClass out;
  out.subcritical_margin = mstar - rp;

  if (cfg.neumann()) {
    const bool homogeneous = cfg.q.is_constant() && cfg.r.is_constant() && cfg.r.inf() == cfg.q.inf() &&
                             cfg.q.inf() > 2.0;
    if (homogeneous) {
      const double q = cfg.q.inf();
      if (cfg.p.sup() < q) out.tag = CaseTag::HomogeneousPPlusLtQ;
      else if (q < cfg.p.inf()) out.tag = CaseTag::HomogeneousQLtPMinus;
    }
    return out;
  }
  if (!cfg.robin()) return out;

  if (rp < minpq) out.tag = CaseTag::SublinearA;
  else if (rm < minpq && minpq <= rp && rp < mstar) out.tag = CaseTag::SmallLambdaB;
  else if (m.sup() < rm && rp < mstar) out.tag = CaseTag::SuperlinearC;
  return out;
}

}  // namespace pqs
