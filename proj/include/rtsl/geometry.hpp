// Grid geometry: positions, shapes, rasterization and path search.
//
// Coordinates are in cell units with the origin at the top-left corner, x to
// the right and y downward. Cell (i, j) covers [i, i+1) x [j, j+1).

#ifndef RTSL_GEOMETRY_HPP
#define RTSL_GEOMETRY_HPP

#include <cmath>
#include <compare>
#include <functional>
#include <optional>
#include <set>
#include <variant>
#include <vector>

namespace rtsl {

struct Position {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Position&) const = default;
};

struct Cell {
  int x = 0;
  int y = 0;

  auto operator<=>(const Cell&) const = default;
};

inline Position cell_center(Cell c) { return {c.x + 0.5, c.y + 0.5}; }

double distance(Position a, Position b);

// Distance from a point to the closed unit square of a cell.
double distance_to_cell(Position p, Cell c);

namespace shape {
struct Point {
  bool operator==(const Point&) const = default;
};
struct Square {
  double side = 1.0;
  bool operator==(const Square&) const = default;
};
// `facing` is the side that faces the attacker (perpendicular to the heading),
// `depth` is the extent along the heading.
struct Rectangle {
  double facing = 1.0;
  double depth = 1.0;
  bool operator==(const Rectangle&) const = default;
};
struct Circle {
  double radius = 1.0;
  bool operator==(const Circle&) const = default;
};
// Apex at the cast center, base of length `base` at distance `height` along
// the heading.
struct FCone {
  double height = 1.0;
  double base = 1.0;
  bool operator==(const FCone&) const = default;
};
// FCone flipped 180 degrees: base at the cast center, apex at `height`.
struct BCone {
  double height = 1.0;
  double base = 1.0;
  bool operator==(const BCone&) const = default;
};
}  // namespace shape

using ShapeSpec = std::variant<shape::Point, shape::Square, shape::Rectangle, shape::Circle, shape::FCone, shape::BCone>;

const char* shape_name(const ShapeSpec& s);

struct OrientedShape {
  ShapeSpec spec;
  Position center;
  // Unit vector; ignored by Point, Square and Circle.
  Position heading{1.0, 0.0};
};

// Heading from `from` toward `to`; (1, 0) when the points coincide.
Position heading_between(Position from, Position to);

// Boundary-inclusive point membership.
bool shape_contains(const OrientedShape& s, Position p);

// Cells whose center lies inside or on the boundary of the shape.
std::set<Cell> cells_in_shape(const OrientedShape& s);

std::set<Cell> cells_in_vision(Position center, double vision);

using Passability = std::function<bool(Cell)>;

// A* over 8-connected cells (diagonal cost sqrt 2, no corner cutting).
// Waypoints are cell centers after the start cell; the final waypoint is
// `to` itself. Returns an empty path when `from == to`.
std::optional<std::vector<Position>> find_path(const Passability& passable, int width, int height,
                                               Position from, Position to);

std::optional<std::vector<Cell>> find_cell_path(const Passability& passable, int width, int height, Cell from,
                                                Cell to);

// Cost of a cell-center path as find_path would charge it.
double path_cost(Cell from, const std::vector<Cell>& cells);

inline Cell cell_of(Position p) { return Cell{static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y))}; }

}  // namespace rtsl

#endif  // RTSL_GEOMETRY_HPP
