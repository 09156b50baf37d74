#include "surrosynth/arc/scene.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <set>

namespace surrosynth::arc {

namespace {

constexpr std::array<std::string_view, kNumShapes> kShapeNames = {"ENCLOSED", "SQUARE", "OTHER"};
constexpr std::array<std::string_view, kNumDirs> kDirNames = {
    "UP", "DOWN", "LEFT", "RIGHT", "UPLEFT", "DOWNLEFT", "UPRIGHT", "DOWNRIGHT"};
constexpr std::array<std::string_view, kNumAxes> kAxisNames = {"VERTICAL", "HORIZONTAL", "LEFTDIAGONAL",
                                                               "RIGHTDIAGONAL"};

bool cell_less(const Cell& a, const Cell& b) {
  return a.row != b.row ? a.row < b.row : a.col < b.col;
}

// Sorts by position; when a position repeats, the last written color wins.
std::vector<Cell> normalize(std::vector<Cell> cells) {
  std::stable_sort(cells.begin(), cells.end(), cell_less);
  std::vector<Cell> out;
  out.reserve(cells.size());
  for (const Cell& c : cells) {
    if (!out.empty() && out.back().row == c.row && out.back().col == c.col) {
      out.back() = c;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

Shape classify(const std::vector<Cell>& cells, int r0, int c0, int h, int w) {
  std::vector<char> mine(std::size_t(h) * w, 0);
  for (const Cell& c : cells) mine[std::size_t(c.row - r0) * w + (c.col - c0)] = 1;
  // Flood the non-object cells of the bounding box from its border.
  std::vector<char> seen(mine.size(), 0);
  std::vector<std::pair<int, int>> stack;
  auto push = [&](int r, int c) {
    if (r < 0 || c < 0 || r >= h || c >= w) return;
    const std::size_t k = std::size_t(r) * w + c;
    if (mine[k] || seen[k]) return;
    seen[k] = 1;
    stack.emplace_back(r, c);
  };
  for (int r = 0; r < h; ++r) {
    push(r, 0);
    push(r, w - 1);
  }
  for (int c = 0; c < w; ++c) {
    push(0, c);
    push(h - 1, c);
  }
  while (!stack.empty()) {
    auto [r, c] = stack.back();
    stack.pop_back();
    push(r - 1, c);
    push(r + 1, c);
    push(r, c - 1);
    push(r, c + 1);
  }
  for (std::size_t k = 0; k < mine.size(); ++k) {
    if (!mine[k] && !seen[k]) return Shape::kEnclosed;
  }
  if (static_cast<int>(cells.size()) == h * w && h == w) return Shape::kSquare;
  return Shape::kOther;
}

SceneObject describe(std::vector<Cell> cells) {
  SceneObject o;
  o.cells = normalize(std::move(cells));
  std::array<int, kNumColors> freq{};
  int r0 = INT_MAX, c0 = INT_MAX, r1 = INT_MIN, c1 = INT_MIN;
  for (const Cell& c : o.cells) {
    ++freq[c.color];
    r0 = std::min(r0, c.row);
    r1 = std::max(r1, c.row);
    c0 = std::min(c0, c.col);
    c1 = std::max(c1, c.col);
  }
  o.color = static_cast<std::uint8_t>(std::max_element(freq.begin(), freq.end()) - freq.begin());
  o.size = static_cast<int>(o.cells.size());
  o.row = r0;
  o.column = c0;
  o.height = r1 - r0 + 1;
  o.width = c1 - c0 + 1;
  o.shape = classify(o.cells, r0, c0, o.height, o.width);
  return o;
}

}  // namespace

std::string_view shape_name(Shape s) { return kShapeNames.at(static_cast<std::size_t>(s)); }
std::string_view dir_name(Dir d) { return kDirNames.at(static_cast<std::size_t>(d)); }
std::string_view axis_name(Axis a) { return kAxisNames.at(static_cast<std::size_t>(a)); }

std::array<int, 2> dir_offset(Dir d) {
  switch (d) {
    case Dir::kUp: return {-1, 0};
    case Dir::kDown: return {1, 0};
    case Dir::kLeft: return {0, -1};
    case Dir::kRight: return {0, 1};
    case Dir::kUpLeft: return {-1, -1};
    case Dir::kDownLeft: return {1, -1};
    case Dir::kUpRight: return {-1, 1};
    case Dir::kDownRight: return {1, 1};
  }
  return {0, 0};
}

int SceneObject::attr(Attr a) const {
  switch (a) {
    case Attr::kColor: return color;
    case Attr::kSize: return size;
    case Attr::kDegree: return degree;
    case Attr::kWidth: return width;
    case Attr::kHeight: return height;
    case Attr::kShape: return static_cast<int>(shape);
    case Attr::kRow: return row;
    case Attr::kColumn: return column;
  }
  return 0;
}

std::vector<int> Scene::owner_map() const {
  std::vector<int> owner(std::size_t(height) * width, -1);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (const Cell& c : objects[i].cells) owner[std::size_t(c.row) * width + c.col] = static_cast<int>(i);
  }
  return owner;
}

Scene make_scene(int height, int width, std::uint8_t background, std::vector<std::vector<Cell>> objects) {
  Scene s;
  s.height = height;
  s.width = width;
  s.background = background;
  for (auto& cells : objects) {
    std::erase_if(cells, [&](const Cell& c) { return c.row < 0 || c.col < 0 || c.row >= height || c.col >= width; });
    if (!cells.empty()) s.objects.push_back(describe(std::move(cells)));
  }
  const std::size_t n = s.objects.size();
  s.neighbors.assign(n, std::vector<bool>(n, false));
  const std::vector<int> owner = s.owner_map();
  constexpr std::array<std::array<int, 2>, 4> kRays = {{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  for (std::size_t i = 0; i < n; ++i) {
    for (const Cell& c : s.objects[i].cells) {
      for (auto [dr, dc] : kRays) {
        int r = c.row + dr, col = c.col + dc;
        while (r >= 0 && col >= 0 && r < height && col < width) {
          const int o = owner[std::size_t(r) * width + col];
          if (o >= 0) {
            if (static_cast<std::size_t>(o) != i) s.neighbors[i][o] = true;
            break;
          }
          r += dr;
          col += dc;
        }
      }
    }
  }
  // A ray seen from one side only still makes both objects neighbors.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (s.neighbors[i][j]) s.neighbors[j][i] = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    s.objects[i].degree = static_cast<int>(std::count(s.neighbors[i].begin(), s.neighbors[i].end(), true));
  }
  for (int a = 0; a < kNumAttrs; ++a) {
    int lo = INT_MAX, hi = INT_MIN;
    for (const auto& o : s.objects) {
      lo = std::min(lo, o.attr(static_cast<Attr>(a)));
      hi = std::max(hi, o.attr(static_cast<Attr>(a)));
    }
    s.min_attr[a] = n ? lo : 0;
    s.max_attr[a] = n ? hi : 0;
  }
  return s;
}

Scene abstract_scene(const Grid& grid, const AbstractionConfig& config) {
  std::vector<char> seen(grid.cells.size(), 0);
  std::vector<std::vector<Cell>> objects;
  std::vector<std::array<int, 2>> steps = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  if (config.connectivity == 8) steps.insert(steps.end(), {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      const std::uint8_t color = grid.at(r, c);
      if (color == config.background || seen[std::size_t(r) * grid.width + c]) continue;
      std::vector<Cell> cells;
      std::vector<std::pair<int, int>> stack{{r, c}};
      seen[std::size_t(r) * grid.width + c] = 1;
      while (!stack.empty()) {
        auto [cr, cc] = stack.back();
        stack.pop_back();
        cells.push_back({cr, cc, color});
        for (auto [dr, dc] : steps) {
          const int nr = cr + dr, nc = cc + dc;
          if (!grid.contains(nr, nc) || grid.at(nr, nc) != color) continue;
          char& mark = seen[std::size_t(nr) * grid.width + nc];
          if (mark) continue;
          mark = 1;
          stack.emplace_back(nr, nc);
        }
      }
      objects.push_back(std::move(cells));
    }
  }
  return make_scene(grid.height, grid.width, config.background, std::move(objects));
}

std::vector<SceneObject> abstract_objects(const Grid& grid, const AbstractionConfig& config) {
  return abstract_scene(grid, config).objects;
}

Grid render(const Scene& scene) {
  Grid g(scene.height, scene.width, scene.background);
  for (const auto& o : scene.objects) {
    for (const Cell& c : o.cells) {
      if (g.contains(c.row, c.col)) g.at(c.row, c.col) = c.color;
    }
  }
  return g;
}

std::vector<Cell> apply_action(const Scene& scene, std::size_t obj, const std::vector<Cell>& cells,
                               const Action& action) {
  if (cells.empty()) return {};
  const int h_grid = scene.height, w_grid = scene.width;
  auto inside = [&](int r, int c) { return r >= 0 && c >= 0 && r < h_grid && c < w_grid; };
  std::vector<int> owner;
  auto occupied = [&](int r, int c) {
    if (owner.empty()) owner = scene.owner_map();
    const int o = owner[std::size_t(r) * w_grid + c];
    return o >= 0 && static_cast<std::size_t>(o) != obj;
  };

  int r0 = INT_MAX, c0 = INT_MAX, r1 = INT_MIN, c1 = INT_MIN;
  for (const Cell& c : cells) {
    r0 = std::min(r0, c.row);
    r1 = std::max(r1, c.row);
    c0 = std::min(c0, c.col);
    c1 = std::max(c1, c.col);
  }
  const int h = r1 - r0 + 1, w = c1 - c0 + 1;
  std::set<std::pair<int, int>> mine;
  for (const Cell& c : cells) mine.emplace(c.row, c.col);

  std::vector<Cell> out;
  auto remap = [&](auto&& f) {
    for (const Cell& c : cells) {
      auto [nr, nc] = f(c.row - r0, c.col - c0);
      out.push_back({r0 + nr, c0 + nc, c.color});
    }
  };

  switch (action.op) {
    case ActionOp::kNoOp:
      out = cells;
      break;
    case ActionOp::kUpdateColor:
      for (Cell c : cells) {
        c.color = static_cast<std::uint8_t>(action.a);
        out.push_back(c);
      }
      break;
    case ActionOp::kMove: {
      auto [dr, dc] = dir_offset(static_cast<Dir>(action.a));
      for (Cell c : cells) {
        c.row += dr;
        c.col += dc;
        out.push_back(c);
      }
      break;
    }
    case ActionOp::kMoveMax: {
      auto [dr, dc] = dir_offset(static_cast<Dir>(action.a));
      int k = 0;
      while (true) {
        bool ok = true;
        for (const Cell& c : cells) {
          const int r = c.row + (k + 1) * dr, col = c.col + (k + 1) * dc;
          if (!inside(r, col) || occupied(r, col)) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
        ++k;
      }
      for (Cell c : cells) {
        c.row += k * dr;
        c.col += k * dc;
        out.push_back(c);
      }
      break;
    }
    case ActionOp::kExtend: {
      auto [dr, dc] = dir_offset(static_cast<Dir>(action.a));
      const bool overlap = action.b != 0;
      out = cells;
      for (const Cell& c : cells) {
        int r = c.row + dr, col = c.col + dc;
        while (inside(r, col)) {
          if (!overlap && occupied(r, col)) break;
          if (!mine.count({r, col})) out.push_back({r, col, c.color});
          r += dr;
          col += dc;
        }
      }
      break;
    }
    case ActionOp::kRotate:
      switch (action.a) {
        case 90: remap([&](int r, int c) { return std::pair{c, h - 1 - r}; }); break;
        case 180: remap([&](int r, int c) { return std::pair{h - 1 - r, w - 1 - c}; }); break;
        case 270: remap([&](int r, int c) { return std::pair{w - 1 - c, r}; }); break;
        default: out = cells; break;
      }
      break;
    case ActionOp::kFillRectangle: {
      const bool overlap = action.b != 0;
      out = cells;
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          if (mine.count({r, c}) || (!overlap && occupied(r, c))) continue;
          out.push_back({r, c, static_cast<std::uint8_t>(action.a)});
        }
      }
      break;
    }
    case ActionOp::kHollowRectangle:
      for (Cell c : cells) {
        if (c.row > r0 && c.row < r1 && c.col > c0 && c.col < c1) c.color = static_cast<std::uint8_t>(action.a);
        out.push_back(c);
      }
      break;
    case ActionOp::kMirror:
      out = cells;
      switch (static_cast<Axis>(action.a)) {
        case Axis::kVertical: remap([&](int r, int c) { return std::pair{r, 2 * w - 1 - c}; }); break;
        case Axis::kHorizontal: remap([&](int r, int c) { return std::pair{2 * h - 1 - r, c}; }); break;
        case Axis::kLeftDiagonal: remap([&](int r, int c) { return std::pair{2 * h - 1 - r, 2 * w - 1 - c}; }); break;
        case Axis::kRightDiagonal: remap([&](int r, int c) { return std::pair{2 * h - 1 - r, -1 - c}; }); break;
      }
      break;
    case ActionOp::kAddBorder:
      out = cells;
      for (const Cell& c : cells) {
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int r = c.row + dr, col = c.col + dc;
            if (!inside(r, col) || mine.count({r, col}) || occupied(r, col)) continue;
            out.push_back({r, col, static_cast<std::uint8_t>(action.a)});
          }
        }
      }
      break;
    case ActionOp::kFlip:
      switch (static_cast<Axis>(action.a)) {
        case Axis::kVertical: remap([&](int r, int c) { return std::pair{r, w - 1 - c}; }); break;
        case Axis::kHorizontal: remap([&](int r, int c) { return std::pair{h - 1 - r, c}; }); break;
        case Axis::kLeftDiagonal: remap([&](int r, int c) { return std::pair{c, r}; }); break;
        case Axis::kRightDiagonal: remap([&](int r, int c) { return std::pair{w - 1 - c, h - 1 - r}; }); break;
      }
      break;
  }
  std::erase_if(out, [&](const Cell& c) { return !inside(c.row, c.col); });
  return normalize(std::move(out));
}

}  // namespace surrosynth::arc
