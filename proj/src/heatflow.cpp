#include "heal/heatflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "heal/error.hpp"

namespace heal {

BoundarySpec BoundarySpec::dirichlet(std::size_t boundary_count, DenseMatrix gamma) {
  return {BoundaryKind::Dirichlet, std::vector<double>(boundary_count, 1.0), std::vector<double>(boundary_count, 0.0),
          std::move(gamma)};
}

BoundarySpec BoundarySpec::neumann(std::size_t boundary_count, DenseMatrix gamma) {
  return {BoundaryKind::Neumann, std::vector<double>(boundary_count, 0.0), std::vector<double>(boundary_count, 1.0),
          std::move(gamma)};
}

BoundarySpec BoundarySpec::robin(std::vector<double> alpha, std::vector<double> beta, DenseMatrix gamma) {
  return {BoundaryKind::Robin, std::move(alpha), std::move(beta), std::move(gamma)};
}

void BoundarySpec::validate(std::size_t boundary_count) const {
  if (alpha.size() != boundary_count || beta.size() != boundary_count)
    fail(ErrorKind::InvalidArgument, "boundary spec sized for " + std::to_string(alpha.size()) +
                                         " nodes but partition has " + std::to_string(boundary_count));
  if (!gamma.empty() && gamma.rows() != boundary_count)
    fail(ErrorKind::InvalidArgument, "gamma must have one row per boundary node");
  for (std::size_t i = 0; i < boundary_count; ++i) {
    if (!std::isfinite(alpha[i]) || !std::isfinite(beta[i]) || alpha[i] < 0 || beta[i] < 0)
      fail(ErrorKind::InvalidArgument, "boundary coefficients must be finite and nonnegative");
    if (kind == BoundaryKind::Robin && alpha[i] <= 0)
      fail(ErrorKind::Numerical, "robin condition needs alpha > 0 at boundary position " + std::to_string(i));
  }
}

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::Robin: return "robin";
  }
  return "unknown";
}

BoundaryKind parse_boundary_kind(const std::string& name) {
  if (name == "dirichlet") return BoundaryKind::Dirichlet;
  if (name == "neumann") return BoundaryKind::Neumann;
  if (name == "robin") return BoundaryKind::Robin;
  fail(ErrorKind::InvalidArgument, "unknown boundary kind '" + name + "'");
}

FeatureMatrix heat_kernel_apply(const EigenDecomposition& modes, double t, const FeatureMatrix& z) {
  if (t < 0) fail(ErrorKind::InvalidArgument, "heat kernel time must be nonnegative");
  if (t == 0) return z;
  const DenseMatrix& psi = modes.eigenvectors;
  require(psi.rows() == z.rows(), "heat kernel dimension mismatch");
  DenseMatrix coeff = psi.transpose() * z;
  for (std::size_t i = 0; i < coeff.rows(); ++i) {
    const double decay = std::exp(-modes.eigenvalues[i] * t);
    for (double& c : coeff.row(i)) c *= decay;
  }
  return psi * coeff;
}

FeatureMatrix heat_kernel_apply(const DenseMatrix& L, double t, const FeatureMatrix& z) {
  if (t < 0) fail(ErrorKind::InvalidArgument, "heat kernel time must be nonnegative");
  if (t == 0) return z;
  return heat_kernel_apply(eig_sym(L), t, z);
}

FeatureMatrix euler_step(const DenseMatrix& L, double dt, const FeatureMatrix& z) {
  require(dt > 0, "euler step needs dt > 0");
  FeatureMatrix out = L * z;
  out *= -dt;
  out += z;
  return out;
}

namespace {

double lambda_max(const DenseMatrix& L) {
  const auto d = eig_sym(L);
  return d.eigenvalues.empty() ? 0.0 : d.eigenvalues.back();
}

void stability_guard(double dt, double lmax, std::vector<std::string>& warnings) {
  const double product = dt * lmax;
  if (product >= 2.0)
    fail(ErrorKind::Numerical, "unstable step: dt * lambda_max = " + std::to_string(product) + " >= 2");
  if (product > 1.0) warnings.push_back("dt * lambda_max = " + std::to_string(product) + " exceeds 1");
}

void record_modes(DiffusionTrace& trace, const ModeTracking& modes, const FeatureMatrix& state) {
  if (!modes.basis) return;
  DenseMatrix& amp = *trace.mode_amplitudes;
  const std::size_t r = trace.states.size() - 1;
  for (std::size_t i = 0; i < modes.count; ++i) {
    double s = 0.0;
    for (std::size_t v = 0; v < state.rows(); ++v) s += modes.basis->eigenvectors(v, i) * state(v, modes.column);
    amp(r, i) = s;
  }
}

}  // namespace

DiffusionTrace diffuse_with_source(const DenseMatrix& L, const FeatureMatrix& z, const SourceFn& source, double dt,
                                   std::size_t steps, ModeTracking modes) {
  require(dt > 0, "diffusion needs dt > 0");
  require(L.rows() == z.rows(), "diffusion operator and state dimension mismatch");
  DiffusionTrace trace;
  stability_guard(dt, lambda_max(L), trace.warnings);
  if (modes.basis) {
    require(modes.count <= modes.basis->eigenvalues.size(), "too many tracked modes");
    require(modes.column < z.cols() || z.cols() == 0, "tracked column out of range");
    trace.mode_amplitudes = DenseMatrix(steps + 1, modes.count);
  }
  FeatureMatrix u = z;
  for (std::size_t n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    trace.times.push_back(t);
    trace.states.push_back(u);
    trace.energies.push_back(trace_quadratic(L, u));
    record_modes(trace, modes, u);
    if (n == steps) break;
    FeatureMatrix next = euler_step(L, dt, u);
    if (source) {
      FeatureMatrix f = source(t);
      require(f.rows() == u.rows() && f.cols() == u.cols(), "source shape mismatch");
      f *= dt;
      next += f;
    }
    if (!next.all_finite()) fail(ErrorKind::Numerical, "non-finite state at step " + std::to_string(n + 1));
    u = std::move(next);
  }
  return trace;
}

EnergyDecayReport verify_energy_decay(const DenseMatrix& L, const FeatureMatrix& z, const std::vector<double>& t_grid) {
  const auto modes = eig_sym(L);
  EnergyDecayReport rep;
  rep.lambda1 = spectral_gap(modes);
  rep.initial_energy = trace_quadratic(L, z);
  for (double t : t_grid) {
    const FeatureMatrix u = heat_kernel_apply(modes, t, z);
    const double e = trace_quadratic(L, u);
    const double b = std::exp(-2.0 * rep.lambda1 * t) * rep.initial_energy;
    rep.times.push_back(t);
    rep.energies.push_back(e);
    rep.bounds.push_back(b);
    if (e > b * (1.0 + 1e-9) + 1e-300) rep.holds = false;
    if (b > 0) rep.tightest_ratio = std::max(rep.tightest_ratio, e / b);
  }
  return rep;
}

DenseMatrix subset_laplacian(const Hypergraph& h, const Partition& p, NeumannVariant variant) {
  const auto order = p.subset_order();
  std::vector<std::size_t> local(h.num_nodes(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) local[order[k]] = k;
  std::vector<std::vector<std::size_t>> edges;
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const bool crossing = std::binary_search(p.boundary_edges.begin(), p.boundary_edges.end(), e);
    if (crossing && variant == NeumannVariant::Delete) continue;
    std::vector<std::size_t> members;
    for (std::size_t v : h.edge_members(e))
      if (p.in_subset(v)) members.push_back(local[v]);
    if (!members.empty()) edges.push_back(std::move(members));
  }
  return node_laplacian(build_hypergraph(std::move(edges), order.size()));
}

DenseMatrix effective_boundary_operator(const Hypergraph& h, const Partition& p, const BoundarySpec& spec,
                                        NeumannVariant variant) {
  if (p.interior_nodes.empty()) fail(ErrorKind::InvalidArgument, "boundary operator needs a nonempty interior");
  spec.validate(p.boundary_nodes.size());
  if (spec.kind == BoundaryKind::Neumann) return subset_laplacian(h, p, variant);
  const auto blocks = restrict_laplacian(node_laplacian(h), p);
  DenseMatrix op = blocks.interior;
  if (spec.kind == BoundaryKind::Dirichlet) return op;
  DenseMatrix scaled = blocks.interior_to_boundary;
  for (std::size_t b = 0; b < scaled.rows(); ++b)
    for (double& x : scaled.row(b)) x *= spec.beta[b] / spec.alpha[b];
  op -= blocks.boundary_to_interior * scaled;
  return op;
}

BoundaryGap boundary_gap(const Hypergraph& h, const Partition& p, const BoundarySpec& spec, NeumannVariant variant) {
  const auto d = eig_sym(effective_boundary_operator(h, p, spec, variant));
  const auto g = gap_report(d);
  return {g.value, d.eigenvalues.front(), g.negative_count > 0};
}

std::vector<std::size_t> interior_neighbour_counts(const Hypergraph& h, const Partition& p) {
  std::vector<std::size_t> counts;
  std::vector<std::size_t> mark(h.num_nodes(), SIZE_MAX);
  for (std::size_t b = 0; b < p.boundary_nodes.size(); ++b) {
    const std::size_t i = p.boundary_nodes[b];
    std::size_t c = 0;
    for (std::size_t e : h.node_memberships(i))
      for (std::size_t j : h.edge_members(e))
        if (p.node_indicator[j] && mark[j] != b) {
          mark[j] = b;
          ++c;
        }
    counts.push_back(c);
  }
  return counts;
}

namespace {

struct BoundaryRows {
  std::size_t ni = 0;
  std::size_t nb = 0;
  DenseMatrix laplacian;                           // L restricted to S, subset order
  std::vector<std::vector<std::size_t>> neighbours;  // local interior indices per boundary row
  std::vector<double> denom;
};

BoundaryRows boundary_rows(const Hypergraph& h, const Partition& p, const BoundarySpec& spec) {
  spec.validate(p.boundary_nodes.size());
  BoundaryRows br;
  br.ni = p.interior_nodes.size();
  br.nb = p.boundary_nodes.size();
  const auto order = p.subset_order();
  br.laplacian = node_laplacian(h).submatrix(order, order);
  std::vector<std::size_t> local(h.num_nodes(), SIZE_MAX);
  for (std::size_t k = 0; k < br.ni; ++k) local[p.interior_nodes[k]] = k;
  for (std::size_t b = 0; b < br.nb; ++b) {
    std::vector<std::size_t> nbr;
    for (std::size_t e : h.node_memberships(p.boundary_nodes[b]))
      for (std::size_t j : h.edge_members(e))
        if (local[j] != SIZE_MAX) nbr.push_back(local[j]);
    std::sort(nbr.begin(), nbr.end());
    nbr.erase(std::unique(nbr.begin(), nbr.end()), nbr.end());
    const double d = spec.alpha[b] + spec.beta[b] * static_cast<double>(nbr.size());
    if (!(d > 0))
      fail(ErrorKind::Numerical, "singular boundary solve at node " + std::to_string(p.boundary_nodes[b]));
    br.denom.push_back(d);
    br.neighbours.push_back(std::move(nbr));
  }
  return br;
}

double gamma_at(const BoundarySpec& spec, std::size_t b, std::size_t c) {
  return spec.gamma.empty() ? 0.0 : spec.gamma(b, c);
}

void solve_boundary(const BoundaryRows& br, const BoundarySpec& spec, FeatureMatrix& u) {
  for (std::size_t b = 0; b < br.nb; ++b)
    for (std::size_t c = 0; c < u.cols(); ++c) {
      double s = 0.0;
      for (std::size_t j : br.neighbours[b]) s += u(j, c);
      u(br.ni + b, c) = (gamma_at(spec, b, c) + spec.beta[b] * s) / br.denom[b];
    }
}

void check_state(const BoundaryRows& br, const BoundarySpec& spec, const FeatureMatrix& z) {
  if (z.rows() != br.ni + br.nb)
    fail(ErrorKind::InvalidArgument, "state has " + std::to_string(z.rows()) + " rows, partition subset has " +
                                         std::to_string(br.ni + br.nb));
  if (!spec.gamma.empty() && spec.gamma.cols() != z.cols())
    fail(ErrorKind::InvalidArgument, "gamma width does not match state width");
}

void push_snapshot(DiffusionTrace& trace, const DenseMatrix& L, double t, const FeatureMatrix& u) {
  trace.times.push_back(t);
  trace.states.push_back(u);
  trace.energies.push_back(trace_quadratic(L, u));
}

DiffusionTrace boundary_diffuse_impl(const BoundaryRows& br, const BoundarySpec& spec, const FeatureMatrix& z,
                                     const FeatureMatrix* interior_source, double dt, std::size_t steps) {
  require(dt > 0, "diffusion needs dt > 0");
  check_state(br, spec, z);
  DiffusionTrace trace;
  stability_guard(dt, lambda_max(br.laplacian), trace.warnings);
  FeatureMatrix u = z;
  solve_boundary(br, spec, u);
  for (std::size_t n = 0; n <= steps; ++n) {
    push_snapshot(trace, br.laplacian, static_cast<double>(n) * dt, u);
    if (n == steps) break;
    FeatureMatrix next = u;
    for (std::size_t i = 0; i < br.ni; ++i) {
      auto li = br.laplacian.row(i);
      for (std::size_t c = 0; c < u.cols(); ++c) {
        double flux = 0.0;
        for (std::size_t j = 0; j < u.rows(); ++j) flux += li[j] * u(j, c);
        next(i, c) = u(i, c) - dt * flux + (interior_source ? dt * (*interior_source)(i, c) : 0.0);
      }
    }
    solve_boundary(br, spec, next);
    if (!next.all_finite()) fail(ErrorKind::Numerical, "non-finite state at step " + std::to_string(n + 1));
    u = std::move(next);
  }
  return trace;
}

}  // namespace

DiffusionTrace boundary_conditioned_diffuse(const Hypergraph& h, const Partition& p, const BoundarySpec& spec,
                                            const FeatureMatrix& z, double dt, std::size_t steps) {
  return boundary_diffuse_impl(boundary_rows(h, p, spec), spec, z, nullptr, dt, steps);
}

DiffusionTrace boundary_conditioned_diffuse_dense(const Hypergraph& h, const Partition& p, const BoundarySpec& spec,
                                                  const FeatureMatrix& z, double dt, std::size_t steps) {
  require(dt > 0, "diffusion needs dt > 0");
  spec.validate(p.boundary_nodes.size());
  const auto order = p.subset_order();
  const std::size_t ni = p.interior_nodes.size();
  const std::size_t ns = order.size();
  const DenseMatrix L = node_laplacian(h);
  const DenseMatrix Ls = L.submatrix(order, order);
  if (z.rows() != ns) fail(ErrorKind::InvalidArgument, "state does not match partition subset");

  // System matrix: identity on interior rows; boundary row b reads
  // alpha_b u_b + beta_b * sum over interior neighbours j of (u_b - u_j).
  DenseMatrix A = DenseMatrix::identity(ns);
  for (std::size_t b = 0; b < p.boundary_nodes.size(); ++b) {
    const std::size_t row = ni + b;
    A(row, row) = spec.alpha[b];
    for (std::size_t k = 0; k < ni; ++k) {
      bool adjacent = false;
      for (std::size_t e : h.node_memberships(p.boundary_nodes[b])) {
        const auto m = h.edge_members(e);
        if (std::binary_search(m.begin(), m.end(), p.interior_nodes[k])) {
          adjacent = true;
          break;
        }
      }
      if (adjacent) {
        A(row, row) += spec.beta[b];
        A(row, k) -= spec.beta[b];
      }
    }
  }

  auto rhs_for = [&](const FeatureMatrix& interior_values) {
    FeatureMatrix rhs(ns, z.cols());
    for (std::size_t i = 0; i < ni; ++i)
      for (std::size_t c = 0; c < z.cols(); ++c) rhs(i, c) = interior_values(i, c);
    for (std::size_t b = 0; b < p.boundary_nodes.size(); ++b)
      for (std::size_t c = 0; c < z.cols(); ++c) rhs(ni + b, c) = spec.gamma.empty() ? 0.0 : spec.gamma(b, c);
    return rhs;
  };

  DiffusionTrace trace;
  stability_guard(dt, lambda_max(Ls), trace.warnings);
  FeatureMatrix u = solve(A, rhs_for(z));
  for (std::size_t n = 0; n <= steps; ++n) {
    push_snapshot(trace, Ls, static_cast<double>(n) * dt, u);
    if (n == steps) break;
    FeatureMatrix explicit_part = u - dt * (Ls * u);
    u = solve(A, rhs_for(explicit_part));
  }
  return trace;
}

LiftedProblem homogenize(const Hypergraph& h, const Partition& p, const BoundarySpec& spec, const FeatureMatrix& z) {
  const BoundaryRows br = boundary_rows(h, p, spec);
  check_state(br, spec, z);
  LiftedProblem lp;
  lp.lifting = FeatureMatrix(z.rows(), z.cols());
  for (std::size_t b = 0; b < br.nb; ++b)
    for (std::size_t c = 0; c < z.cols(); ++c) lp.lifting(br.ni + b, c) = gamma_at(spec, b, c) / br.denom[b];
  lp.source_correction = br.laplacian * lp.lifting;
  lp.source_correction *= -1.0;
  lp.shifted_initial = z - lp.lifting;
  return lp;
}

DiffusionTrace solve_lifted(const Hypergraph& h, const Partition& p, const BoundarySpec& spec,
                            const LiftedProblem& lifted, double dt, std::size_t steps) {
  BoundarySpec homogeneous = spec;
  homogeneous.gamma = DenseMatrix();
  const BoundaryRows br = boundary_rows(h, p, homogeneous);
  DiffusionTrace trace =
      boundary_diffuse_impl(br, homogeneous, lifted.shifted_initial, &lifted.source_correction, dt, steps);
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    trace.states[k] += lifted.lifting;
    trace.energies[k] = trace_quadratic(br.laplacian, trace.states[k]);
  }
  return trace;
}

double duhamel_mode_step(double lambda, double dt, double u_prev, double eta, double ramp) {
  const double decay = std::exp(-lambda * dt);
  if (lambda == 0.0) return u_prev + eta * dt + 0.5 * ramp * dt * dt;
  const double one_minus = -std::expm1(-lambda * dt);
  return decay * u_prev + eta / lambda * one_minus + ramp * (dt / lambda - one_minus / (lambda * lambda));
}

double mode_lower_bound(double lambda, double eta, double dt, double u_prev) {
  return eta / lambda * -std::expm1(-lambda * dt) - std::exp(-lambda * dt) * std::abs(u_prev);
}

double mode_signed_bound(double lambda, double eta, double dt, double u_prev) {
  return eta / lambda * -std::expm1(-lambda * dt) + std::exp(-lambda * dt) * u_prev;
}

ModePreservationReport verify_mode_preservation(const DenseMatrix& L, const FeatureMatrix& z,
                                                const std::vector<double>& eta, double dt_layer, double ramp) {
  require(dt_layer > 0, "layer step must be positive");
  require(ramp >= 0, "source ramp must be nonnegative");
  const auto modes = eig_sym(L);
  require(eta.size() == modes.eigenvalues.size(), "eta needs one entry per mode");
  require(z.rows() == L.rows() && z.cols() >= 1, "state dimension mismatch");
  const double tau = zero_threshold(L.rows());
  ModePreservationReport rep;
  bool first = true;
  for (std::size_t i = 0; i < modes.eigenvalues.size(); ++i) {
    const double lam = modes.eigenvalues[i];
    if (lam <= tau || eta[i] <= 0) continue;
    double uk = 0.0;
    for (std::size_t v = 0; v < z.rows(); ++v) uk += modes.eigenvectors(v, i) * z(v, 0);
    const double next = duhamel_mode_step(lam, dt_layer, uk, eta[i], ramp);
    const double bound = mode_lower_bound(lam, eta[i], dt_layer, uk);
    const double sbound = mode_signed_bound(lam, eta[i], dt_layer, uk);
    rep.modes.push_back(i);
    rep.lambda.push_back(lam);
    rep.u_prev.push_back(uk);
    rep.u_next.push_back(next);
    rep.bound.push_back(bound);
    rep.signed_bound.push_back(sbound);
    const double slack = std::abs(next) - bound;
    rep.min_slack = first ? slack : std::min(rep.min_slack, slack);
    first = false;
    if (slack < -1e-9) rep.holds = false;
    if (uk >= 0 && next < sbound - 1e-9) rep.signed_holds = false;
  }
  return rep;
}

}  // namespace heal
