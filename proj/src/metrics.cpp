#include "fls/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "fls/kdtree.hpp"

namespace fls {

KdTree3::KdTree3(const std::vector<Vec3>& points) : points_(points) {
  if (points_.empty()) throw std::invalid_argument("KdTree3: empty point set");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), size_t(0));
  nodes_.reserve(points_.size());
  root_ = build(0, points_.size(), 0);
}

int KdTree3::build(size_t begin, size_t end, int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](size_t a, size_t b) {
                     return points_[a](axis) < points_[b](axis);
                   });
  Node node;
  node.axis = axis;
  node.index = order_[mid];
  const int self = int(nodes_.size());
  nodes_.push_back(node);
  nodes_[size_t(self)].left = build(begin, mid, depth + 1);
  nodes_[size_t(self)].right = build(mid + 1, end, depth + 1);
  return self;
}

void KdTree3::search(int node, const Vec3& q, double& best) const {
  if (node < 0) return;
  const Node& n = nodes_[size_t(node)];
  const Vec3& p = points_[n.index];
  best = std::min(best, (q - p).squaredNorm());
  const double delta = q(n.axis) - p(n.axis);
  const int near = delta < 0.0 ? n.left : n.right;
  const int far = delta < 0.0 ? n.right : n.left;
  search(near, q, best);
  if (delta * delta < best) search(far, q, best);
}

double KdTree3::nearest_sq(const Vec3& query) const {
  double best = std::numeric_limits<double>::infinity();
  search(root_, query, best);
  return best;
}

MaeResult mae(const ElevationMap& estimate, const ElevationMap& reference,
              double beta) {
  if (!estimate.phi.same_shape(reference.h(), reference.w()))
    throw std::invalid_argument("mae: shape mismatch");
  double sum = 0.0;
  size_t n = 0;
  for (size_t k = 0; k < estimate.phi.data.size(); ++k) {
    if (!estimate.valid.data[k] || !reference.valid.data[k]) continue;
    sum += std::abs(estimate.phi.data[k] - reference.phi.data[k]);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("mae: no jointly valid pixels");
  MaeResult out;
  out.mean = sum / double(n);
  out.scaled = beta * sum / double(estimate.phi.data.size());
  out.pixels = n;
  return out;
}

double chamfer(const PointCloud& s1, const PointCloud& s2, double nu) {
  if (s1.empty() || s2.empty())
    throw std::invalid_argument("chamfer: empty point set");
  const KdTree3 tree1(s1.points);
  const KdTree3 tree2(s2.points);
  double sum12 = 0.0, sum21 = 0.0;
  for (const Vec3& p : s1.points) sum12 += tree2.nearest_sq(p);
  for (const Vec3& p : s2.points) sum21 += tree1.nearest_sq(p);
  return nu * sum12 / double(s1.size()) + nu * sum21 / double(s2.size());
}

double f_score(const PointCloud& estimate, const PointCloud& reference,
               double threshold) {
  if (estimate.empty() || reference.empty())
    throw std::invalid_argument("f_score: empty point set");
  if (!(threshold > 0.0))
    throw std::invalid_argument("f_score: threshold must be > 0");
  const double t2 = threshold * threshold;
  const KdTree3 est_tree(estimate.points);
  const KdTree3 ref_tree(reference.points);
  size_t close_est = 0, close_ref = 0;
  for (const Vec3& p : estimate.points)
    close_est += ref_tree.nearest_sq(p) <= t2;
  for (const Vec3& p : reference.points)
    close_ref += est_tree.nearest_sq(p) <= t2;
  const double precision = 100.0 * double(close_est) / double(estimate.size());
  const double recall = 100.0 * double(close_ref) / double(reference.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::string EvalResult::to_json() const {
  nlohmann::ordered_json j;
  j["mae_rad"] = mae.mean;
  j["mae_scaled"] = mae.scaled;
  j["mae_pixels"] = mae.pixels;
  j["cd"] = cd;
  for (const auto& [threshold, score] : f_scores) {
    char key[32];
    std::snprintf(key, sizeof(key), "f_%gmm", threshold * 1000.0);
    j[key] = score;
  }
  return j.dump(2);
}

EvalResult evaluate(const ElevationMap& estimate, const ElevationMap& reference,
                    const PointCloud& est_cloud, const PointCloud& ref_cloud,
                    const std::vector<double>& thresholds, double beta,
                    double nu) {
  EvalResult out;
  out.mae = mae(estimate, reference, beta);
  out.cd = chamfer(est_cloud, ref_cloud, nu);
  for (double t : thresholds) out.f_scores[t] = f_score(est_cloud, ref_cloud, t);
  return out;
}

}  // namespace fls
