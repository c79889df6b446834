#pragma once

#include <string>
#include <vector>

#include "parkrl/se2.hpp"

namespace parkrl {

enum class Steer : uint8_t { LEFT, STRAIGHT, RIGHT };
enum class Gear : uint8_t { FORWARD, BACKWARD };

// One signed arc/straight piece of a Reeds-Shepp word. Arc segments use
// radius r_min; length is arc length, always >= 0.
struct RSSegment {
  Steer steer;
  Gear gear;
  double length;
};

struct RSPath {
  std::vector<RSSegment> segments;  // zero-length pieces already dropped
  std::string word;                 // e.g. "L+S+L+"

  double total_length() const;
  int gear_shifts() const;
};

// All feasible Reeds-Shepp candidates between two poses: the 9 base
// expression families evaluated under time-flip, reflection, and backwards
// transforms. Every candidate reaches the goal exactly; the list contains
// the global optimum.
std::vector<RSPath> enumerate_all(const Pose2D& start, const Pose2D& goal, double r_min);

// Shortest candidate; ties broken by fewer gear shifts, then word order.
RSPath solve(const Pose2D& start, const Pose2D& goal, double r_min);

// Poses spaced <= ds along the path, first == start, last == endpoint.
std::vector<Pose2D> sample(const RSPath& path, const Pose2D& start, double r_min,
                           double ds);

// Endpoint reached by following the path from start.
Pose2D path_endpoint(const RSPath& path, const Pose2D& start, double r_min);

}  // namespace parkrl
