#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "network.hpp"
#include "quadrature.hpp"
#include "transport.hpp"

namespace tpn {

/// Training points: a uniform (t, x) lattice crossed with the quadrature
/// nodes in mu, plus fixed random initial- and boundary-condition samples.
///
/// Interior points are grouped in mu-columns: every retained (t_i, x_j) pair
/// carries all quadrature nodes, since the scattering average at that pair
/// needs the full column.
struct CollocationSet {
  std::vector<double> t_nodes;
  std::vector<double> x_nodes;
  AngularGrid grid;
  std::vector<std::array<int, 2>> columns;  // (t index, x index), ascending
  double interior_weight = 0.0;             // 1 / (#columns * #mu nodes)
  Points ic_points;                         // rows t (= 0), x, mu
  Points bc_points;                         // rows t, x, mu
  bool specular = false;
  std::uint64_t seed = 0;

  std::size_t interior_size() const noexcept { return columns.size() * grid.size(); }
};

/// `subsample` in (0, 1] keeps that fraction of the (t, x) columns, drawn
/// uniformly without replacement; 1 keeps the full lattice.
CollocationSet build_collocation(const TransportProblem& problem, int n_t, int n_x, const AngularGrid& grid, int n_ic,
                                 int n_bc, std::uint64_t seed, double subsample = 1.0);

/// n points from lo to hi inclusive; a single point sits at lo.
std::vector<double> uniform_nodes(double lo, double hi, int n);

struct LossParts {
  double total = 0.0;
  double ge = 0.0;
  double ic = 0.0;
  double bc = 0.0;
};

enum class LossTerm { governing, initial, boundary };

/// A contiguous slice of one loss term: mu-columns for the governing term,
/// sample indices otherwise. Records are replayed (forward pass cached on a
/// tape, then reversed) to produce gradients.
struct ResidualRecord {
  LossTerm term = LossTerm::governing;
  std::size_t first = 0;
  std::size_t count = 0;
};

/// Fixed partition of a collocation set into records, independent of the
/// worker count.
std::vector<ResidualRecord> partition_records(const CollocationSet& set);

double loss_ge(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set, int threads = 1);
double loss_ic(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set, int threads = 1);
double loss_bc(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set, int threads = 1);
LossParts loss_total(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set,
                     int threads = 1);

/// Loss_Total and its exact parameter gradient (including the coupling of
/// every mu node through the scattering average).
LossParts loss_and_gradient(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set,
                            GradientBuffer& grad, int threads = 1);

/// Gradient of the summed loss contribution of `batch`.
GradientBuffer backward(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set,
                        std::span<const ResidualRecord> batch, int threads = 1);

/// Value and input partials of a closed-form field, for driving the loss
/// assembly without a network.
struct FieldSample {
  double value = 0.0;
  double d_t = 0.0;
  double d_x = 0.0;
};
using AnalyticField = std::function<FieldSample(double t, double x, double mu)>;

double loss_ge_field(const AnalyticField& field, const TransportProblem& problem, const CollocationSet& set);

}  // namespace tpn
