#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ppdre/common.hpp"
#include "ppdre/estimator.hpp"

namespace ppdre {

/// Independent balanced random partitions of the two samples.
struct FoldAssignment {
  std::vector<int> fold_p;
  std::vector<int> fold_q;
  int k = 0;
  std::uint64_t seed = 0;
};

FoldAssignment kfold_split(Index n_p, Index n_q, int k, std::uint64_t seed);

/// Unregularized validation loss of a fitted ratio on held-out data:
///   (1/n_q) sum r(x_i^q)^2 - (2/n_p) sum r(x_i^p).
/// Lower is better; the minimum over true ratios is -E_q[r*^2].
double validation_loss(const RatioFn& ratio, const Matrix& heldout_p,
                       const Matrix& heldout_q);

/// One hyperparameter combination for a named method.
struct GridPoint {
  std::string method;
  std::map<std::string, double> values;

  double at(const std::string& name) const;
};

/// Fits a method at a grid point on the given training subsets and returns
/// an evaluator for validation. The seed is already derived per task.
using MethodFitter = std::function<RatioFn(const GridPoint&, const SampleSet& train_p,
                                            const SampleSet& train_q,
                                            std::uint64_t seed)>;

struct GridSearchResult {
  GridPoint best;
  std::size_t best_index = 0;
  std::vector<double> table;             // fold-mean validation loss per point
  std::vector<std::string> failures;     // empty string when a point succeeded
};

/// Exhaustive search: fold-mean validation loss per grid point, best by
/// minimum with earliest-point tie-break. Points whose fit throws on any
/// fold are excluded; if every point fails, throws an error aggregating the
/// per-point messages. Tasks are keyed by (point, fold) and may run on
/// several workers without changing the result.
GridSearchResult grid_search(const MethodFitter& fitter, const std::vector<GridPoint>& grid,
                             const SampleSet& x_p, const SampleSet& x_q,
                             const FoldAssignment& folds, std::uint64_t seed,
                             std::size_t workers = 1);

struct SelectKResult {
  Index best_k = 0;
  PPRatioModel model;                 // refit on all data at best_k
  std::vector<double> fold_mean_losses;  // indexed by K - 1
  std::vector<double> best_so_far;       // running minimum bookkeeping
};

/// Greedy growth of the projection count: extend each fold model one
/// projection at a time, tracking the fold-mean validation loss, and stop
/// once `patience` consecutive increments fail to improve the best loss by
/// more than improve_tol. The best K is then refit on all data.
SelectKResult select_k(const FitConfig& cfg, const SampleSet& x_p, const SampleSet& x_q,
                       Index k_max, int patience, const FoldAssignment& folds,
                       std::uint64_t seed, std::size_t workers = 1,
                       double improve_tol = 1e-6);

/// Hyperparameter grids for the projection-pursuit estimator.
struct PpdreGrids {
  std::vector<Index> basis_sizes{20, 50, 70, 100, 150};
  std::vector<double> ridges{0.5, 1.0, 5.0, 10.0};
  std::vector<double> learn_rates{0.001, 0.01, 0.1};
  Index k_max = 15;
  int patience = 1;
  // Greedy K growth is the default; "grid" evaluates the listed checkpoint
  // counts along a single growth pass instead.
  bool greedy_k = true;
  std::vector<Index> k_grid{5, 10, 15};
  // The listed ridge values penalize the unnormalized (sum-form) loss; the
  // per-sample objective divides its data terms by n, so the effective
  // ridge is lambda / n_q at fit time. Disable to pass the values through.
  bool ridge_on_sum_scale = true;
  // Optimizer step budget per projection during fold fits; the winning
  // configuration is refit with the full budget.
  int cv_max_inner_iters = 200;
  int refit_max_inner_iters = 2000;
};

struct PpdreSelection {
  FitConfig config;
  Index best_k = 0;
  PPRatioModel model;
  double best_loss = 0.0;
  std::vector<std::pair<GridPoint, double>> table;
};

/// Full selection for the projection-pursuit estimator: grid over
/// (J, lambda, delta) with K chosen per point by greedy growth on the
/// folds, then a refit on all data at the winning configuration.
PpdreSelection select_ppdre(const PpdreGrids& grids, const SampleSet& x_p,
                            const SampleSet& x_q, const FoldAssignment& folds,
                            std::uint64_t seed, std::size_t workers = 1);

/// Table-4-style default grid helpers for the kernel baselines.
std::vector<GridPoint> ulsif_default_grid(double median_dist);
std::vector<GridPoint> kliep_default_grid(double median_dist);

}  // namespace ppdre
