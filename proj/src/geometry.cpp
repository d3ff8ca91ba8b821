#include "rtsl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <tuple>

namespace rtsl {

namespace {

constexpr double kEps = 1e-9;
constexpr double kSqrt2 = 1.41421356237309504880;

double dot(Position a, Position b) { return a.x * b.x + a.y * b.y; }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Coordinates of p relative to the shape frame: u along the heading, v along
// the left normal.
std::pair<double, double> local(const OrientedShape& s, Position p) {
  Position d{p.x - s.center.x, p.y - s.center.y};
  Position n{-s.heading.y, s.heading.x};
  return {dot(d, s.heading), dot(d, n)};
}

double reach(const ShapeSpec& spec) {
  return std::visit(overloaded{
                        [](const shape::Point&) { return 0.0; },
                        [](const shape::Square& q) { return q.side / 2.0; },
                        [](const shape::Rectangle& r) { return std::hypot(r.facing / 2.0, r.depth / 2.0); },
                        [](const shape::Circle& c) { return c.radius; },
                        [](const shape::FCone& c) { return std::hypot(c.height, c.base / 2.0); },
                        [](const shape::BCone& c) { return std::hypot(c.height, c.base / 2.0); },
                    },
                    spec);
}

}  // namespace

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

double distance_to_cell(Position p, Cell c) {
  double dx = std::max({c.x - p.x, 0.0, p.x - (c.x + 1.0)});
  double dy = std::max({c.y - p.y, 0.0, p.y - (c.y + 1.0)});
  return std::hypot(dx, dy);
}

const char* shape_name(const ShapeSpec& s) {
  return std::visit(overloaded{
                        [](const shape::Point&) { return "Point"; },
                        [](const shape::Square&) { return "Square"; },
                        [](const shape::Rectangle&) { return "Rectangle"; },
                        [](const shape::Circle&) { return "Circle"; },
                        [](const shape::FCone&) { return "F_Cone"; },
                        [](const shape::BCone&) { return "B_Cone"; },
                    },
                    s);
}

Position heading_between(Position from, Position to) {
  double d = distance(from, to);
  if (d == 0.0) return {1.0, 0.0};
  return {(to.x - from.x) / d, (to.y - from.y) / d};
}

bool shape_contains(const OrientedShape& s, Position p) {
  return std::visit(overloaded{
                        [&](const shape::Point&) { return distance(s.center, p) <= kEps; },
                        [&](const shape::Square& q) {
                          return std::abs(p.x - s.center.x) <= q.side / 2.0 + kEps &&
                                 std::abs(p.y - s.center.y) <= q.side / 2.0 + kEps;
                        },
                        [&](const shape::Rectangle& r) {
                          auto [u, v] = local(s, p);
                          return std::abs(u) <= r.depth / 2.0 + kEps && std::abs(v) <= r.facing / 2.0 + kEps;
                        },
                        [&](const shape::Circle& c) { return distance(s.center, p) <= c.radius + kEps; },
                        [&](const shape::FCone& c) {
                          auto [u, v] = local(s, p);
                          if (u < -kEps || u > c.height + kEps) return false;
                          return std::abs(v) <= c.base / 2.0 * (u / c.height) + kEps;
                        },
                        [&](const shape::BCone& c) {
                          auto [u, v] = local(s, p);
                          if (u < -kEps || u > c.height + kEps) return false;
                          return std::abs(v) <= c.base / 2.0 * (1.0 - u / c.height) + kEps;
                        },
                    },
                    s.spec);
}

std::set<Cell> cells_in_shape(const OrientedShape& s) {
  if (std::holds_alternative<shape::Point>(s.spec)) return {cell_of(s.center)};
  const double r = reach(s.spec) + 1.0;
  const int x0 = static_cast<int>(std::floor(s.center.x - r));
  const int x1 = static_cast<int>(std::ceil(s.center.x + r));
  const int y0 = static_cast<int>(std::floor(s.center.y - r));
  const int y1 = static_cast<int>(std::ceil(s.center.y + r));
  std::set<Cell> out;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (shape_contains(s, cell_center(Cell{x, y}))) out.insert(Cell{x, y});
    }
  }
  return out;
}

std::set<Cell> cells_in_vision(Position center, double vision) {
  auto cells = cells_in_shape(OrientedShape{shape::Circle{std::max(vision, 0.0)}, center, {1.0, 0.0}});
  cells.insert(cell_of(center));
  return cells;
}

std::optional<std::vector<Cell>> find_cell_path(const Passability& passable, int width, int height, Cell from,
                                                Cell to) {
  auto in_bounds = [&](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; };
  auto open = [&](Cell c) { return in_bounds(c) && passable(c); };
  if (from == to) return std::vector<Cell>{};
  if (!open(to)) return std::nullopt;

  auto heuristic = [&](Cell c) {
    double dx = std::abs(c.x - to.x);
    double dy = std::abs(c.y - to.y);
    return std::max(dx, dy) - std::min(dx, dy) + kSqrt2 * std::min(dx, dy);
  };

  using Entry = std::tuple<double, int, int>;  // f, x, y
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  std::map<Cell, double> g;
  std::map<Cell, Cell> parent;
  std::set<Cell> closed;
  g[from] = 0.0;
  frontier.emplace(heuristic(from), from.x, from.y);

  while (!frontier.empty()) {
    auto [f, x, y] = frontier.top();
    frontier.pop();
    Cell cur{x, y};
    if (!closed.insert(cur).second) continue;
    if (cur == to) {
      std::vector<Cell> path;
      for (Cell c = to; c != from; c = parent.at(c)) path.push_back(c);
      std::reverse(path.begin(), path.end());
      return path;
    }
    const double gc = g.at(cur);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        Cell next{cur.x + dx, cur.y + dy};
        if (!open(next) || closed.count(next)) continue;
        if (dx != 0 && dy != 0 && (!open(Cell{cur.x + dx, cur.y}) || !open(Cell{cur.x, cur.y + dy}))) continue;
        double ng = gc + ((dx != 0 && dy != 0) ? kSqrt2 : 1.0);
        auto it = g.find(next);
        if (it != g.end() && it->second <= ng) continue;
        g[next] = ng;
        parent[next] = cur;
        frontier.emplace(ng + heuristic(next), next.x, next.y);
      }
    }
  }
  return std::nullopt;
}

std::optional<std::vector<Position>> find_path(const Passability& passable, int width, int height,
                                               Position from, Position to) {
  if (from == to) return std::vector<Position>{};
  auto cells = find_cell_path(passable, width, height, cell_of(from), cell_of(to));
  if (!cells) return std::nullopt;
  std::vector<Position> out;
  out.reserve(cells->size() + 1);
  for (Cell c : *cells) out.push_back(cell_center(c));
  if (out.empty()) {
    out.push_back(to);
  } else {
    out.back() = to;
  }
  return out;
}

double path_cost(Cell from, const std::vector<Cell>& cells) {
  double cost = 0.0;
  Cell prev = from;
  for (Cell c : cells) {
    cost += (c.x != prev.x && c.y != prev.y) ? kSqrt2 : 1.0;
    prev = c;
  }
  return cost;
}

}  // namespace rtsl
