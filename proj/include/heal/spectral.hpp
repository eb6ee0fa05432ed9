#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "heal/dense.hpp"
#include "heal/hypergraph.hpp"

namespace heal {

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  DenseMatrix eigenvectors;         // column i pairs with eigenvalues[i]
  int sweeps = 0;
};

EigenDecomposition eig_sym(const DenseMatrix& m);

double zero_threshold(std::size_t n);

struct GapReport {
  double value = 0.0;
  std::size_t index = 0;
  std::size_t zero_multiplicity = 0;
  std::size_t negative_count = 0;
  bool disconnected() const { return zero_multiplicity > 1; }
};

GapReport gap_report(const EigenDecomposition& d);
double spectral_gap(const EigenDecomposition& d);

double dirichlet_energy(const Hypergraph& h, const FeatureMatrix& x);

struct CheegerResult {
  double phi = 0.0;
  std::vector<std::size_t> argmin_subset;
  std::uint64_t subsets_examined = 0;
  std::int64_t cut = 0;
  std::int64_t volume = 0;
};

constexpr std::size_t kCheegerExactLimit = 24;

CheegerResult cheeger_exact(const Hypergraph& h);
CheegerResult cheeger_sweep(const Hypergraph& h, std::span<const double> fiedler);

// Cut multiplicity and volume of an arbitrary node set.
std::int64_t boundary_multiplicity(const Hypergraph& h, std::span<const std::size_t> subset);
std::int64_t volume(const Hypergraph& h, std::span<const std::size_t> subset);

struct CheegerReport {
  double phi = 0.0;
  double lambda1 = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool holds = false;
  std::size_t rank = 0;
  std::vector<std::size_t> subset;
};

CheegerReport verify_cheeger_inequality(const Hypergraph& h);

// Leading nontrivial eigenvector of the node Laplacian by deflated power
// iteration on I - L; used where a dense decomposition is too slow.
std::vector<double> fiedler_vector(const Hypergraph& h, std::size_t max_iterations = 5000, double tol = 1e-10);

}  // namespace heal
