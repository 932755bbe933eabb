// Median-split kd-tree over 3D points for nearest-neighbor queries.

#ifndef FLS_KDTREE_HPP
#define FLS_KDTREE_HPP

#include <vector>

#include "fls/geometry.hpp"

namespace fls {

class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Vec3>& points);

  /// Squared distance to the nearest stored point. Undefined on an empty
  /// tree (construction throws for empty input).
  double nearest_sq(const Vec3& query) const;

  size_t size() const { return points_.size(); }

 private:
  struct Node {
    int left = -1, right = -1;
    int axis = 0;
    size_t index = 0;  // splitting point
  };

  int build(size_t begin, size_t end, int depth);
  void search(int node, const Vec3& q, double& best) const;

  std::vector<Vec3> points_;
  std::vector<size_t> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace fls

#endif  // FLS_KDTREE_HPP
