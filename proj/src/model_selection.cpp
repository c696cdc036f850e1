#include "ppdre/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppdre/baselines.hpp"
#include "ppdre/parallel.hpp"
#include "ppdre/rng.hpp"

namespace ppdre {

namespace {

std::vector<int> balanced_labels(Index n, int k, SeededRng rng) {
  std::vector<std::size_t> order = rng.permutation(static_cast<std::size_t>(n));
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index pos = 0; pos < n; ++pos)
    labels[order[static_cast<std::size_t>(pos)]] = static_cast<int>(pos % k);
  return labels;
}

Matrix rows_where(const Matrix& x, const std::vector<int>& labels, int fold, bool equal) {
  Index count = 0;
  for (int l : labels) count += ((l == fold) == equal) ? 1 : 0;
  Matrix out(count, x.cols());
  Index r = 0;
  for (Index i = 0; i < x.rows(); ++i)
    if ((labels[static_cast<std::size_t>(i)] == fold) == equal) out.row(r++) = x.row(i);
  return out;
}

}  // namespace

FoldAssignment kfold_split(Index n_p, Index n_q, int k, std::uint64_t seed) {
  require(k >= 2, "kfold_split: need at least two folds");
  require(n_p >= k && n_q >= k, "kfold_split: fewer rows than folds");
  SeededRng root(seed);
  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  out.fold_p = balanced_labels(n_p, k, root.split(0));
  out.fold_q = balanced_labels(n_q, k, root.split(1));
  return out;
}

double validation_loss(const RatioFn& ratio, const Matrix& heldout_p,
                       const Matrix& heldout_q) {
  require(heldout_p.rows() >= 1 && heldout_q.rows() >= 1,
          "validation_loss: held-out sets must be nonempty");
  double sq = 0.0;
  for (Index i = 0; i < heldout_q.rows(); ++i) {
    const double r = ratio(heldout_q.row(i).transpose());
    sq += r * r;
  }
  double lin = 0.0;
  for (Index i = 0; i < heldout_p.rows(); ++i)
    lin += ratio(heldout_p.row(i).transpose());
  return sq / double(heldout_q.rows()) - 2.0 * lin / double(heldout_p.rows());
}

double GridPoint::at(const std::string& name) const {
  auto it = values.find(name);
  require(it != values.end(), "GridPoint: missing hyperparameter '" + name + "'");
  return it->second;
}

GridSearchResult grid_search(const MethodFitter& fitter, const std::vector<GridPoint>& grid,
                             const SampleSet& x_p, const SampleSet& x_q,
                             const FoldAssignment& folds, std::uint64_t seed,
                             std::size_t workers) {
  require(!grid.empty(), "grid_search: empty grid");
  const std::size_t n_points = grid.size();
  const std::size_t n_folds = static_cast<std::size_t>(folds.k);

  std::vector<double> losses(n_points * n_folds,
                             std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> failures(n_points);

  parallel_for(n_points * n_folds, workers, [&](std::size_t task) {
    const std::size_t pi = task / n_folds;
    const int fold = static_cast<int>(task % n_folds);
    try {
      SampleSet train_p(rows_where(x_p.x, folds.fold_p, fold, false), x_p.tag);
      SampleSet train_q(rows_where(x_q.x, folds.fold_q, fold, false), x_q.tag);
      const Matrix val_p = rows_where(x_p.x, folds.fold_p, fold, true);
      const Matrix val_q = rows_where(x_q.x, folds.fold_q, fold, true);
      const RatioFn ratio = fitter(grid[pi], train_p, train_q,
                                   derive_seed(seed, pi, static_cast<std::uint64_t>(fold)));
      losses[task] = validation_loss(ratio, val_p, val_q);
    } catch (const std::exception& e) {
      failures[pi] = e.what();
    }
  });

  GridSearchResult out;
  out.table.assign(n_points, std::numeric_limits<double>::quiet_NaN());
  out.failures = failures;
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t pi = 0; pi < n_points; ++pi) {
    if (!failures[pi].empty()) continue;
    double mean = 0.0;
    for (std::size_t f = 0; f < n_folds; ++f) mean += losses[pi * n_folds + f];
    mean /= double(n_folds);
    out.table[pi] = mean;
    if (mean < best) {
      best = mean;
      out.best = grid[pi];
      out.best_index = pi;
      found = true;
    }
  }
  if (!found) {
    std::string msg = "grid_search: all grid points failed:";
    for (std::size_t pi = 0; pi < n_points; ++pi)
      msg += "\n  point " + std::to_string(pi) + ": " + failures[pi];
    throw Error(msg);
  }
  return out;
}

namespace {

// Per-fold growth state for greedy K selection.
struct FoldGrowth {
  SampleSet train_p, train_q;
  Matrix val_p, val_q;
  Vector w_q, w_p;       // running truncated products on the training rows
  Vector val_rp, val_rq; // running products on the validation rows
  PPRatioModel model;

  void init(const SampleSet& x_p, const SampleSet& x_q, const FoldAssignment& folds,
            int fold) {
    train_p = SampleSet(rows_where(x_p.x, folds.fold_p, fold, false), x_p.tag);
    train_q = SampleSet(rows_where(x_q.x, folds.fold_q, fold, false), x_q.tag);
    val_p = rows_where(x_p.x, folds.fold_p, fold, true);
    val_q = rows_where(x_q.x, folds.fold_q, fold, true);
    w_q = Vector::Ones(train_q.n());
    w_p = Vector::Ones(train_p.n());
    val_rp = Vector::Ones(val_p.rows());
    val_rq = Vector::Ones(val_q.rows());
    model.d = x_p.dim();
  }

  // Extend by one projection and return this fold's validation loss.
  double grow(const FitConfig& cfg, SeededRng& rng) {
    Projection proj =
        canonicalize(fit_projection(w_q, w_p, train_q, train_p, cfg, rng, nullptr));
    const Vector z_q = train_q.x * proj.a;
    const Vector z_p = train_p.x * proj.a;
    for (Index i = 0; i < w_q.size(); ++i)
      w_q(i) *= cfg.truncate_prev_weights ? proj.factor(z_q(i)) : proj.factor_raw(z_q(i));
    for (Index i = 0; i < w_p.size(); ++i)
      w_p(i) *= cfg.truncate_prev_weights ? proj.factor(z_p(i)) : proj.factor_raw(z_p(i));
    const Vector zv_p = val_p * proj.a;
    const Vector zv_q = val_q * proj.a;
    for (Index i = 0; i < val_rp.size(); ++i) val_rp(i) *= proj.factor(zv_p(i));
    for (Index i = 0; i < val_rq.size(); ++i) val_rq(i) *= proj.factor(zv_q(i));
    model.projections.push_back(std::move(proj));
    return val_rq.squaredNorm() / double(val_rq.size()) -
           2.0 * val_rp.sum() / double(val_rp.size());
  }
};

}  // namespace

SelectKResult select_k(const FitConfig& cfg, const SampleSet& x_p, const SampleSet& x_q,
                       Index k_max, int patience, const FoldAssignment& folds,
                       std::uint64_t seed, std::size_t workers, double improve_tol) {
  require(k_max >= 1, "select_k: k_max must be at least 1");
  require(patience >= 1, "select_k: patience must be at least 1");

  const std::size_t n_folds = static_cast<std::size_t>(folds.k);
  std::vector<FoldGrowth> growth(n_folds);
  for (std::size_t f = 0; f < n_folds; ++f)
    growth[f].init(x_p, x_q, folds, static_cast<int>(f));

  SelectKResult out;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (Index k = 1; k <= k_max; ++k) {
    std::vector<double> fold_losses(n_folds);
    parallel_for(n_folds, workers, [&](std::size_t f) {
      SeededRng rng(derive_seed(seed, f, static_cast<std::uint64_t>(k)));
      fold_losses[f] = growth[f].grow(cfg, rng);
    });
    double mean = 0.0;
    for (double l : fold_losses) mean += l;
    mean /= double(n_folds);
    out.fold_mean_losses.push_back(mean);
    if (mean < best - improve_tol) {
      best = mean;
      out.best_k = k;
      stale = 0;
    } else {
      if (out.best_k == 0) out.best_k = k;  // k = 1 is always admissible
      ++stale;
      if (stale >= patience) break;
    }
    out.best_so_far.push_back(best);
  }
  // Keep the bookkeeping aligned when the loop broke early.
  while (out.best_so_far.size() < out.fold_mean_losses.size())
    out.best_so_far.push_back(best);

  FitConfig refit = cfg;
  out.model = fit(x_p, x_q, refit, out.best_k);
  return out;
}

PpdreSelection select_ppdre(const PpdreGrids& grids, const SampleSet& x_p,
                            const SampleSet& x_q, const FoldAssignment& folds,
                            std::uint64_t seed, std::size_t workers) {
  require(!grids.basis_sizes.empty() && !grids.ridges.empty() &&
              !grids.learn_rates.empty(),
          "select_ppdre: empty grid");
  struct Point {
    GridPoint gp;
    FitConfig cfg;
  };
  // Fold training keeps (k-1)/k of the q rows; the sum-scale ridge divides
  // by the q-sample size actually used in each fit.
  const double n_q_fold =
      double(x_q.n()) * double(folds.k - 1) / double(folds.k);
  std::vector<Point> points;
  for (Index j : grids.basis_sizes)
    for (double lambda : grids.ridges)
      for (double delta : grids.learn_rates) {
        Point pt;
        pt.gp.method = "ppdre";
        pt.gp.values = {{"J", double(j)}, {"lambda", lambda}, {"delta", delta}};
        pt.cfg.basis_size = j;
        pt.cfg.ridge = grids.ridge_on_sum_scale ? lambda / n_q_fold : lambda;
        pt.cfg.learn_rate = delta;
        pt.cfg.max_inner_iters = grids.cv_max_inner_iters;
        points.push_back(std::move(pt));
      }

  const std::size_t n_points = points.size();
  const std::size_t n_folds = static_cast<std::size_t>(folds.k);
  std::vector<double> point_loss(n_points, std::numeric_limits<double>::quiet_NaN());
  std::vector<Index> point_k(n_points, 0);
  std::vector<std::string> failures(n_points);

  const Index k_cap = grids.greedy_k
                          ? grids.k_max
                          : *std::max_element(grids.k_grid.begin(), grids.k_grid.end());

  parallel_for(n_points, workers, [&](std::size_t pi) {
    try {
      std::vector<FoldGrowth> growth(n_folds);
      for (std::size_t f = 0; f < n_folds; ++f)
        growth[f].init(x_p, x_q, folds, static_cast<int>(f));
      double best = std::numeric_limits<double>::infinity();
      Index best_k = 0;
      int stale = 0;
      for (Index k = 1; k <= k_cap; ++k) {
        double mean = 0.0;
        for (std::size_t f = 0; f < n_folds; ++f) {
          SeededRng rng(derive_seed(derive_seed(seed, pi, f), static_cast<std::uint64_t>(k)));
          mean += growth[f].grow(points[pi].cfg, rng);
        }
        mean /= double(n_folds);
        const bool checkpoint =
            grids.greedy_k ||
            std::find(grids.k_grid.begin(), grids.k_grid.end(), k) != grids.k_grid.end();
        if (checkpoint) {
          if (mean < best - 1e-6) {
            best = mean;
            best_k = k;
            stale = 0;
          } else {
            if (best_k == 0) best_k = k;
            if (grids.greedy_k && ++stale >= grids.patience) break;
          }
        }
      }
      point_loss[pi] = best;
      point_k[pi] = best_k;
    } catch (const std::exception& e) {
      failures[pi] = e.what();
    }
  });

  std::size_t winner = n_points;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t pi = 0; pi < n_points; ++pi) {
    if (!failures[pi].empty()) continue;
    if (point_loss[pi] < best) {
      best = point_loss[pi];
      winner = pi;
    }
  }
  if (winner == n_points) {
    std::string msg = "select_ppdre: all grid points failed:";
    for (std::size_t pi = 0; pi < n_points; ++pi)
      msg += "\n  point " + std::to_string(pi) + ": " + failures[pi];
    throw Error(msg);
  }

  PpdreSelection out;
  out.config = points[winner].cfg;
  if (grids.ridge_on_sum_scale)
    out.config.ridge = points[winner].gp.at("lambda") / double(x_q.n());
  out.config.max_inner_iters = grids.refit_max_inner_iters;
  out.config.seed = derive_seed(seed, 0x9e3779b9ULL);
  out.best_k = point_k[winner];
  out.best_loss = best;
  out.model = fit(x_p, x_q, out.config, out.best_k);
  for (std::size_t pi = 0; pi < n_points; ++pi)
    out.table.emplace_back(points[pi].gp, point_loss[pi]);
  return out;
}

std::vector<GridPoint> ulsif_default_grid(double median_dist) {
  std::vector<GridPoint> grid;
  for (double f : {0.25, 0.5, 1.0, 2.0, 4.0})
    for (double lambda : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
      GridPoint gp;
      gp.method = "ulsif";
      gp.values = {{"sigma", f * median_dist}, {"lambda", lambda}};
      grid.push_back(std::move(gp));
    }
  return grid;
}

std::vector<GridPoint> kliep_default_grid(double median_dist) {
  std::vector<GridPoint> grid;
  for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    GridPoint gp;
    gp.method = "kliep";
    gp.values = {{"sigma", f * median_dist}};
    grid.push_back(std::move(gp));
  }
  return grid;
}

}  // namespace ppdre
