#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "heal/dense.hpp"
#include "heal/hypergraph.hpp"
#include "heal/spectral.hpp"

namespace heal {

enum class BoundaryKind { Dirichlet, Neumann, Robin };

// Vectors are indexed by the partition's boundary_nodes order; gamma has one
// row per boundary node (zero columns means homogeneous data).
struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::Dirichlet;
  std::vector<double> alpha;
  std::vector<double> beta;
  DenseMatrix gamma;

  static BoundarySpec dirichlet(std::size_t boundary_count, DenseMatrix gamma = {});
  static BoundarySpec neumann(std::size_t boundary_count, DenseMatrix gamma = {});
  static BoundarySpec robin(std::vector<double> alpha, std::vector<double> beta, DenseMatrix gamma = {});

  void validate(std::size_t boundary_count) const;
};

std::string to_string(BoundaryKind kind);
BoundaryKind parse_boundary_kind(const std::string& name);

enum class NeumannVariant { Restrict, Delete };

struct DiffusionTrace {
  std::vector<double> times;
  std::vector<FeatureMatrix> states;
  std::vector<double> energies;
  std::optional<DenseMatrix> mode_amplitudes;  // rows = snapshots, cols = modes
  std::vector<std::string> warnings;
};

FeatureMatrix heat_kernel_apply(const DenseMatrix& L, double t, const FeatureMatrix& z);
FeatureMatrix heat_kernel_apply(const EigenDecomposition& modes, double t, const FeatureMatrix& z);
FeatureMatrix euler_step(const DenseMatrix& L, double dt, const FeatureMatrix& z);

using SourceFn = std::function<FeatureMatrix(double)>;

struct ModeTracking {
  const EigenDecomposition* basis = nullptr;
  std::size_t count = 0;
  std::size_t column = 0;
};

// Throws Numerical when dt * lambda_max >= 2.
DiffusionTrace diffuse_with_source(const DenseMatrix& L, const FeatureMatrix& z, const SourceFn& source, double dt,
                                   std::size_t steps, ModeTracking modes = {});

struct EnergyDecayReport {
  bool holds = true;
  double lambda1 = 0.0;
  double initial_energy = 0.0;
  double tightest_ratio = 0.0;
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<double> bounds;
};

EnergyDecayReport verify_energy_decay(const DenseMatrix& L, const FeatureMatrix& z, const std::vector<double>& t_grid);

// Node Laplacian of S (interior then boundary order) after restricting or
// deleting the hyperedges that leave S.
DenseMatrix subset_laplacian(const Hypergraph& h, const Partition& p, NeumannVariant variant);

DenseMatrix effective_boundary_operator(const Hypergraph& h, const Partition& p, const BoundarySpec& spec,
                                        NeumannVariant variant = NeumannVariant::Restrict);

struct BoundaryGap {
  double gap = 0.0;
  double min_eigenvalue = 0.0;
  bool negative = false;
};

BoundaryGap boundary_gap(const Hypergraph& h, const Partition& p, const BoundarySpec& spec,
                         NeumannVariant variant = NeumannVariant::Restrict);

// Rows of z follow p.subset_order(). Interior rows advance explicitly; each
// boundary row is then solved from alpha u + beta * sum_j (u - u_j) = gamma
// over interior neighbours j.
DiffusionTrace boundary_conditioned_diffuse(const Hypergraph& h, const Partition& p, const BoundarySpec& spec,
                                            const FeatureMatrix& z, double dt, std::size_t steps);

// Reference path: assembles the full per-step system and solves it densely.
DiffusionTrace boundary_conditioned_diffuse_dense(const Hypergraph& h, const Partition& p, const BoundarySpec& spec,
                                                  const FeatureMatrix& z, double dt, std::size_t steps);

struct LiftedProblem {
  FeatureMatrix lifting;            // w over S, zero on interior rows
  FeatureMatrix source_correction;  // -L_S w
  FeatureMatrix shifted_initial;    // z - w
};

LiftedProblem homogenize(const Hypergraph& h, const Partition& p, const BoundarySpec& spec, const FeatureMatrix& z);

// Integrates v for the homogeneous problem with the lifted source and returns u = v + w.
DiffusionTrace solve_lifted(const Hypergraph& h, const Partition& p, const BoundarySpec& spec,
                            const LiftedProblem& lifted, double dt, std::size_t steps);

std::vector<std::size_t> interior_neighbour_counts(const Hypergraph& h, const Partition& p);

double duhamel_mode_step(double lambda, double dt, double u_prev, double eta, double ramp = 0.0);
double mode_lower_bound(double lambda, double eta, double dt, double u_prev);
double mode_signed_bound(double lambda, double eta, double dt, double u_prev);

struct ModePreservationReport {
  bool holds = true;
  bool signed_holds = true;
  double min_slack = 0.0;
  std::vector<std::size_t> modes;
  std::vector<double> lambda;
  std::vector<double> u_prev;
  std::vector<double> u_next;
  std::vector<double> bound;
  std::vector<double> signed_bound;
};

// Source in mode i is eta_i + ramp * s over the step; modes with lambda <= tau0
// or eta_i <= 0 are not excited and are skipped.
ModePreservationReport verify_mode_preservation(const DenseMatrix& L, const FeatureMatrix& z,
                                                const std::vector<double>& eta, double dt_layer, double ramp = 0.0);

}  // namespace heal
