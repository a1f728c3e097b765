#include "proxgen/metrics.hpp"

#include <cmath>
#include <limits>

#include "proxgen/errors.hpp"
#include "proxgen/rng.hpp"

namespace proxgen {

namespace {

// grid fields reject off-grid queries; score the nearest in-grid point instead
double eval_clamped(const SdfField& sdf, const Vec3& p) {
  if (!sdf.is_grid()) return sdf.eval(p);
  Vec3 q = p;
  const Vec3& lo = sdf.grid_origin();
  for (int a = 0; a < 3; ++a) {
    const double hi = lo[a] + sdf.grid_cell()[a] * double(sdf.grid_res()[a] - 1);
    q[a] = std::min(std::max(q[a], lo[a]), hi);
  }
  return sdf.eval(q);
}

}  // namespace

double non_collision_score(const std::vector<Vec3>& verts, const SdfField& sdf) {
  if (verts.empty()) throw ValidationError("non_collision_score: empty vertex set");
  int above = 0;
  for (const Vec3& p : verts)
    if (eval_clamped(sdf, p) >= 0.0) ++above;
  return double(above) / double(verts.size());
}

double contact_score(const std::vector<Vec3>& verts, const SdfField& sdf) {
  if (verts.empty()) throw ValidationError("contact_score: empty vertex set");
  double lo = std::numeric_limits<double>::infinity();
  for (const Vec3& p : verts) lo = std::min(lo, eval_clamped(sdf, p));
  return lo <= 0.0 ? 1.0 : 0.0;
}

std::vector<int> kmeans(const Eigen::MatrixXd& rows, int k, std::uint64_t seed, int max_iters,
                        Eigen::MatrixXd* centroids_out) {
  const int m = int(rows.rows());
  const int d = int(rows.cols());
  if (k < 1) throw ValidationError("kmeans: k must be positive");
  if (m < k) throw ValidationError("kmeans: fewer samples than clusters");

  Rng rng(seed);
  Eigen::MatrixXd centers(k, d);
  Eigen::VectorXd d2 = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());

  // greedy seeding: first center uniform, later ones proportional to the
  // squared distance to the nearest chosen center
  centers.row(0) = rows.row(int(rng.uniform_index(std::uint64_t(m))));
  for (int c = 1; c < k; ++c) {
    for (int i = 0; i < m; ++i)
      d2[i] = std::min(d2[i], (rows.row(i) - centers.row(c - 1)).squaredNorm());
    const double total = d2.sum();
    int pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = m - 1;
      for (int i = 0; i < m; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = int(rng.uniform_index(std::uint64_t(m)));
    }
    centers.row(c) = rows.row(pick);
  }

  std::vector<int> assign(size_t(m), 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (int i = 0; i < m; ++i) {
      int best = 0;
      double best_d = (rows.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double dc = (rows.row(i) - centers.row(c)).squaredNorm();
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      if (assign[size_t(i)] != best) {
        assign[size_t(i)] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (int i = 0; i < m; ++i) {
      sums.row(assign[size_t(i)]) += rows.row(i);
      counts[assign[size_t(i)]] += 1;
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0) centers.row(c) = sums.row(c) / double(counts[c]);
    // empty clusters keep their previous center
  }
  if (centroids_out) *centroids_out = centers;
  return assign;
}

DiversityResult diversity(const std::vector<BodyParams>& samples, int k, std::uint64_t seed,
                          bool include_translation) {
  const int m = int(samples.size());
  if (m < k) throw ValidationError("diversity: fewer samples than clusters");
  const int d = include_translation ? kParamCount : kParamCount - 3;
  Eigen::MatrixXd rows(m, d);
  for (int i = 0; i < m; ++i) {
    const auto full = samples[size_t(i)].to_vector();
    if (include_translation)
      rows.row(i) = full.transpose();
    else
      rows.row(i) = full.tail(d).transpose();
  }

  Eigen::MatrixXd centers;
  const std::vector<int> assign = kmeans(rows, k, seed, 300, &centers);

  std::vector<int> hist(size_t(k), 0);
  for (int a : assign) hist[size_t(a)] += 1;
  DiversityResult res;
  for (int c = 0; c < k; ++c)
    if (hist[size_t(c)] > 0) {
      const double p = double(hist[size_t(c)]) / double(m);
      res.entropy -= p * std::log(p);
    }
  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += (rows.row(i) - centers.row(assign[size_t(i)])).norm();
  res.cluster_size = sum / double(m);
  return res;
}

}  // namespace proxgen
