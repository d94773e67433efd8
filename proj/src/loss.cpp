#include "loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include "error.hpp"
#include "parallel.hpp"

namespace tpn {

namespace {

constexpr std::size_t target_chunk_points = 4096;

// Residuals of one mu-column given network values and streaming derivatives
// at every quadrature node. Returns the scattering average used.
double column_residuals(const TransportProblem& problem, const AngularGrid& grid, double t, double x,
                        std::span<const double> values, std::span<const double> streaming,
                        std::span<double> residuals) {
  const double avg = angular_average(values, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    residuals[k] = pde_residual_directional(problem, values[k], streaming[k], avg, t, x, grid.nodes[k]);
  }
  return avg;
}

void check_finite(double v, const char* term, std::size_t index) {
  if (!std::isfinite(v)) {
    fail(ErrorCode::non_finite, std::string("non-finite ") + term + " residual at sample " + std::to_string(index));
  }
}

struct ChunkEval {
  double loss = 0.0;
  std::optional<GradientBuffer> grad;
};

double governing_chunk(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set,
                       const ResidualRecord& rec, GradientBuffer* grad) {
  const auto nmu = static_cast<Eigen::Index>(set.grid.size());
  const auto batch = static_cast<Eigen::Index>(rec.count) * nmu;
  Points pts(3, batch);
  Points dir(3, batch);
  for (std::size_t c = 0; c < rec.count; ++c) {
    const auto [ti, xj] = set.columns[rec.first + c];
    for (Eigen::Index k = 0; k < nmu; ++k) {
      const auto p = static_cast<Eigen::Index>(c) * nmu + k;
      const double mu = set.grid.nodes[k];
      pts.col(p) << set.t_nodes[ti], set.x_nodes[xj], mu;
      dir.col(p) << 1.0, mu, 0.0;
    }
  }
  const Points tangents[] = {dir};
  const ForwardTape tape = forward_batch(params, pts, tangents);
  const Matrix& out = tape.output();

  const double w = set.interior_weight;
  const double sigma_t = problem.sigma_t();
  const double sigma_s = problem.sigma_s;
  RowVector adjoint;
  if (grad) adjoint.resize(2 * batch);

  std::vector<double> residuals(nmu);
  double sum = 0.0;
  for (std::size_t c = 0; c < rec.count; ++c) {
    const auto [ti, xj] = set.columns[rec.first + c];
    const auto base = static_cast<Eigen::Index>(c) * nmu;
    column_residuals(problem, set.grid, set.t_nodes[ti], set.x_nodes[xj], {out.data() + base, std::size_t(nmu)},
                     {out.data() + batch + base, std::size_t(nmu)}, residuals);
    double column_adj = 0.0;
    for (Eigen::Index k = 0; k < nmu; ++k) {
      sum += residuals[k] * residuals[k] * w;
      column_adj += 2.0 * w * residuals[k];
    }
    if (grad) {
      // d/dpsi_k picks up sigma_t from its own residual and -sigma_s w_k / 2
      // from every residual in the column through the average.
      for (Eigen::Index k = 0; k < nmu; ++k) {
        const double g = 2.0 * w * residuals[k];
        adjoint[base + k] = sigma_t * g - sigma_s * 0.5 * set.grid.weights[k] * column_adj;
        adjoint[batch + base + k] = g;
      }
    }
  }
  check_finite(sum, "governing", rec.first);
  if (grad) backward_batch(params, tape, adjoint, *grad);
  return sum;
}

double initial_chunk(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set,
                     const ResidualRecord& rec, GradientBuffer* grad) {
  const auto n = static_cast<Eigen::Index>(rec.count);
  const Points pts = set.ic_points.middleCols(static_cast<Eigen::Index>(rec.first), n);
  const ForwardTape tape = forward_batch(params, pts);
  const Matrix& out = tape.output();
  const double w = 1.0 / static_cast<double>(set.ic_points.cols());
  RowVector adjoint(grad ? n : 0);
  double sum = 0.0;
  for (Eigen::Index p = 0; p < n; ++p) {
    const double r = out(0, p) - problem.initial(pts(1, p), pts(2, p));
    check_finite(r, "initial-condition", rec.first + p);
    sum += r * r * w;
    if (grad) adjoint[p] = 2.0 * w * r;
  }
  if (grad) backward_batch(params, tape, adjoint, *grad);
  return sum;
}

double boundary_chunk(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set,
                      const ResidualRecord& rec, GradientBuffer* grad) {
  const auto n = static_cast<Eigen::Index>(rec.count);
  const double w = 1.0 / static_cast<double>(set.bc_points.cols());
  const Points samples = set.bc_points.middleCols(static_cast<Eigen::Index>(rec.first), n);
  double sum = 0.0;
  if (!set.specular) {
    const ForwardTape tape = forward_batch(params, samples);
    const Matrix& out = tape.output();
    RowVector adjoint(grad ? n : 0);
    for (Eigen::Index p = 0; p < n; ++p) {
      const double r = out(0, p) - problem.inflow(samples(0, p), samples(1, p), samples(2, p));
      check_finite(r, "boundary-condition", rec.first + p);
      sum += r * r * w;
      if (grad) adjoint[p] = 2.0 * w * r;
    }
    if (grad) backward_batch(params, tape, adjoint, *grad);
    return sum;
  }

  // Specular: compare each sample against its mirror direction.
  Points pts(3, 2 * n);
  pts.leftCols(n) = samples;
  pts.rightCols(n) = samples;
  pts.row(2).tail(n) *= -1.0;
  const ForwardTape tape = forward_batch(params, pts);
  const Matrix& out = tape.output();
  RowVector adjoint(grad ? 2 * n : 0);
  for (Eigen::Index p = 0; p < n; ++p) {
    const double r = out(0, p) - out(0, n + p);
    check_finite(r, "boundary-condition", rec.first + p);
    sum += r * r * w;
    if (grad) {
      adjoint[p] = 2.0 * w * r;
      adjoint[n + p] = -2.0 * w * r;
    }
  }
  if (grad) backward_batch(params, tape, adjoint, *grad);
  return sum;
}

double evaluate_record(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set,
                       const ResidualRecord& rec, GradientBuffer* grad) {
  if (rec.count == 0) return 0.0;
  switch (rec.term) {
    case LossTerm::governing:
      return governing_chunk(params, problem, set, rec, grad);
    case LossTerm::initial:
      return initial_chunk(params, problem, set, rec, grad);
    case LossTerm::boundary:
      return boundary_chunk(params, problem, set, rec, grad);
  }
  return 0.0;
}

void validate_record(const CollocationSet& set, const ResidualRecord& rec) {
  std::size_t limit = 0;
  switch (rec.term) {
    case LossTerm::governing:
      limit = set.columns.size();
      break;
    case LossTerm::initial:
      limit = static_cast<std::size_t>(set.ic_points.cols());
      break;
    case LossTerm::boundary:
      limit = static_cast<std::size_t>(set.bc_points.cols());
      break;
  }
  require(rec.first + rec.count <= limit, "residual record exceeds its collocation set");
}

// Evaluates records in parallel; per-record losses (and gradients) are
// combined in record order so results do not depend on the worker count.
std::vector<double> evaluate_records(const NetworkParams& params, const TransportProblem& problem,
                                     const CollocationSet& set, std::span<const ResidualRecord> records,
                                     GradientBuffer* grad, int threads) {
  validate_params(params);
  for (const auto& rec : records) validate_record(set, rec);
  std::vector<double> losses(records.size(), 0.0);
  if (!grad) {
    parallel_for(records.size(), threads, [&](std::size_t i) {
      losses[i] = evaluate_record(params, problem, set, records[i], nullptr);
    });
    return losses;
  }

  if (threads <= 1) {
    GradientBuffer scratch = GradientBuffer::zeros_like(params);
    for (std::size_t i = 0; i < records.size(); ++i) {
      scratch.set_zero();
      losses[i] = evaluate_record(params, problem, set, records[i], &scratch);
      *grad += scratch;
    }
  } else {
    std::vector<std::optional<GradientBuffer>> partial(records.size());
    parallel_for(records.size(), threads, [&](std::size_t i) {
      partial[i] = GradientBuffer::zeros_like(params);
      losses[i] = evaluate_record(params, problem, set, records[i], &*partial[i]);
    });
    for (auto& g : partial) *grad += *g;
  }

  if (!grad->all_finite()) {
    for (std::size_t l = 0; l < grad->weights.size(); ++l) {
      const auto& w = grad->weights[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c)
          if (!std::isfinite(w(r, c)))
            fail(ErrorCode::non_finite, "non-finite gradient at weight (layer " + std::to_string(l) + ", row " +
                                            std::to_string(r) + ", col " + std::to_string(c) + ")");
      for (Eigen::Index j = 0; j < grad->biases[l].size(); ++j)
        if (!std::isfinite(grad->biases[l][j]))
          fail(ErrorCode::non_finite,
               "non-finite gradient at bias (layer " + std::to_string(l) + ", row " + std::to_string(j) + ")");
    }
  }
  return losses;
}

LossParts combine(std::span<const ResidualRecord> records, const std::vector<double>& losses) {
  std::vector<double> ge, ic, bc;
  for (std::size_t i = 0; i < records.size(); ++i) {
    switch (records[i].term) {
      case LossTerm::governing:
        ge.push_back(losses[i]);
        break;
      case LossTerm::initial:
        ic.push_back(losses[i]);
        break;
      case LossTerm::boundary:
        bc.push_back(losses[i]);
        break;
    }
  }
  LossParts parts;
  parts.ge = pairwise_sum(ge.data(), ge.size());
  parts.ic = pairwise_sum(ic.data(), ic.size());
  parts.bc = pairwise_sum(bc.data(), bc.size());
  parts.total = parts.ge + parts.ic + parts.bc;
  return parts;
}

std::vector<ResidualRecord> records_for(const CollocationSet& set, LossTerm term) {
  std::vector<ResidualRecord> out;
  for (const auto& rec : partition_records(set))
    if (rec.term == term) out.push_back(rec);
  return out;
}

}  // namespace

std::vector<double> uniform_nodes(double lo, double hi, int n) {
  require(n >= 1, "uniform_nodes: need at least one point");
  std::vector<double> nodes(n, lo);
  if (n == 1) return nodes;
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) nodes[i] = lo + i * h;
  nodes.back() = hi;
  return nodes;
}

CollocationSet build_collocation(const TransportProblem& problem, int n_t, int n_x, const AngularGrid& grid, int n_ic,
                                 int n_bc, std::uint64_t seed, double subsample) {
  validate_problem(problem);
  require(n_t >= 1 && n_x >= 1 && n_ic >= 1 && n_bc >= 1, "collocation counts must be >= 1");
  require(grid.size() >= 1, "collocation needs a non-empty angular grid");
  require(subsample > 0.0 && subsample <= 1.0, "subsample must lie in (0, 1]");
  if (!(problem.x_hi > problem.x_lo) || !(problem.t_end > 0.0)) fail(ErrorCode::invalid_argument, "degenerate domain");

  CollocationSet set;
  set.t_nodes = uniform_nodes(0.0, problem.t_end, n_t);
  set.x_nodes = uniform_nodes(problem.x_lo, problem.x_hi, n_x);
  set.grid = grid;
  set.specular = problem.specular();
  set.seed = seed;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  set.ic_points.resize(3, n_ic);
  for (int i = 0; i < n_ic; ++i) {
    const double x = uniform(problem.x_lo, problem.x_hi);
    const double mu = uniform(-1.0, 1.0);
    set.ic_points.col(i) << 0.0, x, mu;
  }

  set.bc_points.resize(3, n_bc);
  for (int i = 0; i < n_bc; ++i) {
    const double t = uniform(0.0, problem.t_end);
    const bool left = unit(rng) < 0.5;
    const double x = left ? problem.x_lo : problem.x_hi;
    double mu = 0.0;
    if (set.specular) {
      mu = uniform(-1.0, 1.0);
    } else {
      // Incoming half-interval without its endpoint 0: (0, 1] or [-1, 0).
      const double u = 1.0 - unit(rng);
      mu = left ? u : -u;
    }
    set.bc_points.col(i) << t, x, mu;
  }

  const int total_columns = n_t * n_x;
  std::vector<int> order(total_columns);
  std::iota(order.begin(), order.end(), 0);
  int keep = total_columns;
  if (subsample < 1.0) {
    keep = std::max(1, static_cast<int>(std::lround(subsample * total_columns)));
    for (int i = 0; i < keep; ++i) {
      std::uniform_int_distribution<int> pick(i, total_columns - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    order.resize(keep);
    std::sort(order.begin(), order.end());
  }
  set.columns.reserve(keep);
  for (int idx : order) set.columns.push_back({idx / n_x, idx % n_x});
  set.interior_weight = 1.0 / (static_cast<double>(keep) * static_cast<double>(grid.size()));
  return set;
}

std::vector<ResidualRecord> partition_records(const CollocationSet& set) {
  std::vector<ResidualRecord> records;
  const std::size_t columns_per_chunk = std::max<std::size_t>(1, target_chunk_points / std::max<std::size_t>(1, set.grid.size()));
  for (std::size_t c = 0; c < set.columns.size(); c += columns_per_chunk) {
    records.push_back({LossTerm::governing, c, std::min(columns_per_chunk, set.columns.size() - c)});
  }
  const auto n_ic = static_cast<std::size_t>(set.ic_points.cols());
  for (std::size_t i = 0; i < n_ic; i += target_chunk_points) {
    records.push_back({LossTerm::initial, i, std::min(target_chunk_points, n_ic - i)});
  }
  const auto n_bc = static_cast<std::size_t>(set.bc_points.cols());
  for (std::size_t i = 0; i < n_bc; i += target_chunk_points) {
    records.push_back({LossTerm::boundary, i, std::min(target_chunk_points, n_bc - i)});
  }
  return records;
}

double loss_ge(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set, int threads) {
  const auto records = records_for(set, LossTerm::governing);
  return combine(records, evaluate_records(params, problem, set, records, nullptr, threads)).ge;
}

double loss_ic(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set, int threads) {
  const auto records = records_for(set, LossTerm::initial);
  return combine(records, evaluate_records(params, problem, set, records, nullptr, threads)).ic;
}

double loss_bc(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set, int threads) {
  const auto records = records_for(set, LossTerm::boundary);
  return combine(records, evaluate_records(params, problem, set, records, nullptr, threads)).bc;
}

LossParts loss_total(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set,
                     int threads) {
  const auto records = partition_records(set);
  return combine(records, evaluate_records(params, problem, set, records, nullptr, threads));
}

LossParts loss_and_gradient(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set,
                            GradientBuffer& grad, int threads) {
  const auto records = partition_records(set);
  grad = GradientBuffer::zeros_like(params);
  return combine(records, evaluate_records(params, problem, set, records, &grad, threads));
}

GradientBuffer backward(const NetworkParams& params, const TransportProblem& problem, const CollocationSet& set,
                        std::span<const ResidualRecord> batch, int threads) {
  GradientBuffer grad = GradientBuffer::zeros_like(params);
  evaluate_records(params, problem, set, batch, &grad, threads);
  return grad;
}

double loss_ge_field(const AnalyticField& field, const TransportProblem& problem, const CollocationSet& set) {
  const std::size_t nmu = set.grid.size();
  std::vector<double> values(nmu), streaming(nmu), residuals(nmu), column_sums;
  column_sums.reserve(set.columns.size());
  for (const auto& [ti, xj] : set.columns) {
    const double t = set.t_nodes[ti];
    const double x = set.x_nodes[xj];
    for (std::size_t k = 0; k < nmu; ++k) {
      const double mu = set.grid.nodes[k];
      const FieldSample s = field(t, x, mu);
      values[k] = s.value;
      streaming[k] = s.d_t + mu * s.d_x;
    }
    column_residuals(problem, set.grid, t, x, values, streaming, residuals);
    double sum = 0.0;
    for (double r : residuals) sum += r * r * set.interior_weight;
    column_sums.push_back(sum);
  }
  return pairwise_sum(column_sums.data(), column_sums.size());
}

}  // namespace tpn
