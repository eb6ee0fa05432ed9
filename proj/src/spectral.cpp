#include "heal/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "heal/error.hpp"

namespace heal {

EigenDecomposition eig_sym(const DenseMatrix& m) {
  const std::size_t n = m.rows();
  require(m.cols() == n, "eig_sym needs a square matrix");
  if (!m.is_symmetric(1e-10)) fail(ErrorKind::InvalidArgument, "eig_sym input is not symmetric");
  DenseMatrix a = m;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(j, i) = a(i, j) = 0.5 * (a(i, j) + a(j, i));
  DenseMatrix v = DenseMatrix::identity(n);
  const double norm = a.frobenius();
  constexpr int kMaxSweeps = 64;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  double off = off_norm();
  while (off >= 1e-12 * norm && norm > 0.0) {
    if (sweep == kMaxSweeps)
      fail(ErrorKind::Numerical, "jacobi did not converge in " + std::to_string(kMaxSweeps) +
                                     " sweeps, off-diagonal residual " + std::to_string(off));
    ++sweep;
    // Skip rotations that cannot matter at the current residual level.
    const double skip = 1e-18 * norm;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= skip) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    off = off_norm();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  EigenDecomposition d;
  d.sweeps = sweep;
  d.eigenvalues.resize(n);
  d.eigenvectors = DenseMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    d.eigenvalues[c] = a(src, src);
    // Sign convention: the largest-magnitude component is positive.
    std::size_t big = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (std::abs(v(k, src)) > std::abs(v(big, src)) + 1e-12) big = k;
    const double sign = v(big, src) < 0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) d.eigenvectors(k, c) = sign * v(k, src);
  }
  return d;
}

double zero_threshold(std::size_t n) { return 1e-9 * static_cast<double>(n); }

GapReport gap_report(const EigenDecomposition& d) {
  const double tau = zero_threshold(d.eigenvalues.size());
  GapReport r;
  bool found = false;
  for (std::size_t i = 0; i < d.eigenvalues.size(); ++i) {
    const double lam = d.eigenvalues[i];
    if (lam < -tau) ++r.negative_count;
    else if (lam <= tau) ++r.zero_multiplicity;
    else if (!found) {
      found = true;
      r.value = lam;
      r.index = i;
    }
  }
  if (!found) fail(ErrorKind::Numerical, "no eigenvalue exceeds the zero threshold");
  return r;
}

double spectral_gap(const EigenDecomposition& d) { return gap_report(d).value; }

double dirichlet_energy(const Hypergraph& h, const FeatureMatrix& x) {
  if (x.rows() != h.num_nodes())
    fail(ErrorKind::InvalidArgument, "feature rows " + std::to_string(x.rows()) + " != num_nodes " +
                                         std::to_string(h.num_nodes()));
  std::vector<double> inv_sqrt(h.num_nodes());
  for (std::size_t v = 0; v < h.num_nodes(); ++v) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(h.node_degree(v)));
  double total = 0.0;
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const auto members = h.edge_members(e);
    double edge_sum = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const auto xu = x.row(members[a]);
        const auto xv = x.row(members[b]);
        for (std::size_t c = 0; c < x.cols(); ++c) {
          const double diff = xv[c] * inv_sqrt[members[b]] - xu[c] * inv_sqrt[members[a]];
          edge_sum += diff * diff;
        }
      }
    // Unordered pairs counted once; the ordered sum with the 1/2 prefactor is equal.
    total += edge_sum / static_cast<double>(members.size());
  }
  return total;
}

std::int64_t boundary_multiplicity(const Hypergraph& h, std::span<const std::size_t> subset) {
  std::vector<std::uint8_t> in(h.num_nodes(), 0);
  for (std::size_t v : subset) in[v] = 1;
  std::int64_t cut = 0;
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    std::int64_t a = 0;
    for (std::size_t v : h.edge_members(e)) a += in[v];
    cut += a * (static_cast<std::int64_t>(h.edge_degree(e)) - a);
  }
  return cut;
}

std::int64_t volume(const Hypergraph& h, std::span<const std::size_t> subset) {
  std::int64_t vol = 0;
  for (std::size_t v : subset) vol += static_cast<std::int64_t>(h.node_degree(v));
  return vol;
}

namespace {

std::int64_t total_volume(const Hypergraph& h) {
  std::int64_t t = 0;
  for (std::size_t d : h.node_degrees()) t += static_cast<std::int64_t>(d);
  return t;
}

// Lexicographic order of the sorted member lists encoded by two bitmasks.
bool mask_lex_less(std::uint64_t a, std::uint64_t b) {
  if (a == b) return false;
  const int p = std::countr_zero(a ^ b);
  if ((a >> p) & 1u) return (b >> p) != 0;
  return (a >> p) == 0;
}

bool better_ratio(std::int64_t cut, std::int64_t vol, std::int64_t best_cut, std::int64_t best_vol) {
  return cut * best_vol < best_cut * vol;
}

bool equal_ratio(std::int64_t cut, std::int64_t vol, std::int64_t best_cut, std::int64_t best_vol) {
  return cut * best_vol == best_cut * vol;
}

}  // namespace

CheegerResult cheeger_exact(const Hypergraph& h) {
  const std::size_t n = h.num_nodes();
  if (n > kCheegerExactLimit)
    fail(ErrorKind::Range, "cheeger_exact supports at most " + std::to_string(kCheegerExactLimit) +
                               " nodes (got " + std::to_string(n) + "); use cheeger_sweep");
  require(n >= 2, "cheeger constant needs at least two nodes");
  const std::int64_t vol_total = total_volume(h);
  std::vector<std::int64_t> inside(h.num_edges(), 0);
  std::int64_t cut = 0, vol = 0;
  std::uint64_t mask = 0;
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;

  bool have = false;
  std::int64_t best_cut = 0, best_vol = 1;
  std::uint64_t best_mask = 0;
  CheegerResult res;

  for (std::uint64_t k = 1; k <= full; ++k) {
    const int v = std::countr_zero(k);
    const bool adding = !((mask >> v) & 1u);
    mask ^= std::uint64_t{1} << v;
    for (std::size_t e : h.node_memberships(static_cast<std::size_t>(v))) {
      const std::int64_t d = static_cast<std::int64_t>(h.edge_degree(e));
      const std::int64_t a = inside[e];
      if (adding) {
        cut += d - 2 * a - 1;
        inside[e] = a + 1;
      } else {
        cut += 2 * a - d - 1;
        inside[e] = a - 1;
      }
    }
    vol += (adding ? 1 : -1) * static_cast<std::int64_t>(h.node_degree(static_cast<std::size_t>(v)));
    if (mask == full) continue;
    ++res.subsets_examined;
    if (2 * vol > vol_total) continue;
    if (!have || better_ratio(cut, vol, best_cut, best_vol) ||
        (equal_ratio(cut, vol, best_cut, best_vol) && mask_lex_less(mask, best_mask))) {
      have = true;
      best_cut = cut;
      best_vol = vol;
      best_mask = mask;
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    if ((best_mask >> v) & 1u) res.argmin_subset.push_back(v);
  res.cut = best_cut;
  res.volume = best_vol;
  res.phi = static_cast<double>(best_cut) / static_cast<double>(best_vol);
  return res;
}

CheegerResult cheeger_sweep(const Hypergraph& h, std::span<const double> fiedler) {
  const std::size_t n = h.num_nodes();
  if (fiedler.size() != n)
    fail(ErrorKind::InvalidArgument, "sweep vector has " + std::to_string(fiedler.size()) + " entries, expected " +
                                         std::to_string(n));
  require(n >= 2, "cheeger constant needs at least two nodes");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fiedler[a] < fiedler[b]; });

  const std::int64_t vol_total = total_volume(h);
  std::vector<std::int64_t> inside(h.num_edges(), 0);
  std::vector<std::uint8_t> in(n, 0);
  std::int64_t cut = 0, vol = 0;

  CheegerResult res;
  bool have = false;
  std::int64_t best_cut = 0, best_vol = 1;

  auto side = [&](bool take_prefix) {
    std::vector<std::size_t> s;
    for (std::size_t v = 0; v < n; ++v)
      if ((in[v] != 0) == take_prefix) s.push_back(v);
    return s;
  };

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t v = order[k];
    in[v] = 1;
    for (std::size_t e : h.node_memberships(v)) {
      const std::int64_t d = static_cast<std::int64_t>(h.edge_degree(e));
      cut += d - 2 * inside[e] - 1;
      ++inside[e];
    }
    vol += static_cast<std::int64_t>(h.node_degree(v));
    ++res.subsets_examined;
    const std::int64_t rest = vol_total - vol;
    const std::int64_t small = std::min(vol, rest);
    if (have && !better_ratio(cut, small, best_cut, best_vol) && !equal_ratio(cut, small, best_cut, best_vol))
      continue;
    std::vector<std::size_t> candidate;
    if (vol < rest) candidate = side(true);
    else if (rest < vol) candidate = side(false);
    else candidate = std::min(side(true), side(false));
    if (!have || better_ratio(cut, small, best_cut, best_vol) || candidate < res.argmin_subset) {
      have = true;
      best_cut = cut;
      best_vol = small;
      res.argmin_subset = std::move(candidate);
    }
  }
  res.cut = best_cut;
  res.volume = best_vol;
  res.phi = static_cast<double>(best_cut) / static_cast<double>(best_vol);
  return res;
}

CheegerReport verify_cheeger_inequality(const Hypergraph& h) {
  const std::size_t r = h.uniform_rank();
  if (r < 2) fail(ErrorKind::InvalidArgument, "cheeger inequality check needs an r-uniform hypergraph with r >= 2");
  const CheegerResult c = cheeger_exact(h);
  const EigenDecomposition d = eig_sym(node_laplacian(h));
  CheegerReport rep;
  rep.rank = r;
  rep.phi = c.phi;
  rep.subset = c.argmin_subset;
  rep.lambda1 = spectral_gap(d);
  const double rm1 = static_cast<double>(r - 1);
  rep.lower = c.phi * c.phi / (2.0 * rm1 * rm1);
  rep.upper = 2.0 * c.phi / rm1;
  rep.holds = rep.lower <= rep.lambda1 + 1e-9 && rep.lambda1 <= rep.upper + 1e-9;
  return rep;
}

std::vector<double> fiedler_vector(const Hypergraph& h, std::size_t max_iterations, double tol) {
  const std::size_t n = h.num_nodes();
  require(n >= 2, "fiedler vector needs at least two nodes");
  const auto pairs = node_pair_weights(h);
  std::vector<double> sqrt_d(n);
  for (std::size_t v = 0; v < n; ++v) sqrt_d[v] = std::sqrt(static_cast<double>(h.node_degree(v)));
  double kernel_norm = 0.0;
  for (double s : sqrt_d) kernel_norm += s * s;
  kernel_norm = std::sqrt(kernel_norm);
  std::vector<double> k(n);
  for (std::size_t v = 0; v < n; ++v) k[v] = sqrt_d[v] / kernel_norm;

  auto deflate = [&](std::vector<double>& x) {
    const double dot = std::inner_product(x.begin(), x.end(), k.begin(), 0.0);
    for (std::size_t v = 0; v < n; ++v) x[v] -= dot * k[v];
    double nrm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    for (double& xv : x) xv /= nrm;
  };

  // I - L is positive semidefinite here, so its top eigenvector after removing
  // the known kernel direction pairs with the smallest nonzero eigenvalue of L.
  std::vector<double> x(n), y(n);
  for (std::size_t v = 0; v < n; ++v) x[v] = static_cast<double>(v) - 0.5 * static_cast<double>(n - 1) + 0.25 * std::sin(static_cast<double>(v) * 1.618);
  deflate(x);
  double prev = 0.0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (const auto& [j, w] : pairs[i]) s += w / (sqrt_d[i] * sqrt_d[j]) * x[j];
      y[i] = s;
    }
    const double rayleigh = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
    std::swap(x, y);
    deflate(x);
    if (it > 10 && std::abs(rayleigh - prev) < tol) break;
    prev = rayleigh;
  }
  std::size_t big = 0;
  for (std::size_t v = 1; v < n; ++v)
    if (std::abs(x[v]) > std::abs(x[big]) + 1e-12) big = v;
  if (x[big] < 0)
    for (double& xv : x) xv = -xv;
  return x;
}

}  // namespace heal
