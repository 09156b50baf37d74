#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "surrosynth/arc/grid.hpp"

namespace surrosynth::arc {

struct Cell {
  int row = 0;
  int col = 0;
  std::uint8_t color = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class Shape : std::uint8_t { kEnclosed, kSquare, kOther };

enum class Dir : std::uint8_t { kUp, kDown, kLeft, kRight, kUpLeft, kDownLeft, kUpRight, kDownRight };

enum class Axis : std::uint8_t { kVertical, kHorizontal, kLeftDiagonal, kRightDiagonal };

inline constexpr int kNumDirs = 8;
inline constexpr int kNumAxes = 4;
inline constexpr int kNumShapes = 3;

std::string_view shape_name(Shape s);  // ENCLOSED SQUARE OTHER
std::string_view dir_name(Dir d);      // UP DOWN ... DOWNRIGHT
std::string_view axis_name(Axis a);    // VERTICAL HORIZONTAL LEFTDIAGONAL RIGHTDIAGONAL
std::array<int, 2> dir_offset(Dir d);  // {drow, dcol}

enum class Attr : std::uint8_t { kColor, kSize, kDegree, kWidth, kHeight, kShape, kRow, kColumn };
inline constexpr int kNumAttrs = 8;

struct SceneObject {
  std::vector<Cell> cells;  // sorted by (row, col), nonempty
  std::uint8_t color = 0;   // most frequent cell color
  int size = 0;
  int width = 0;
  int height = 0;
  int row = 0;  // bounding-box origin
  int column = 0;
  int degree = 0;
  Shape shape = Shape::kOther;

  int attr(Attr a) const;
};

struct AbstractionConfig {
  int connectivity = 4;  // 4 or 8
  std::uint8_t background = kBlack;
};

/// Objects of one grid with derived attributes. `neighbors` is the
/// line-of-sight relation: j is a neighbor of i when a horizontal or vertical
/// ray from some cell of i crosses only background before reaching j.
struct Scene {
  int height = 0;
  int width = 0;
  std::uint8_t background = kBlack;
  std::vector<SceneObject> objects;
  std::vector<std::vector<bool>> neighbors;
  std::array<int, kNumAttrs> min_attr{};
  std::array<int, kNumAttrs> max_attr{};

  bool is_neighbor(std::size_t i, std::size_t j) const { return neighbors[i][j]; }
  /// Object index per cell, -1 for background. Later objects win on overlap.
  std::vector<int> owner_map() const;
};

/// Builds a scene from cell sets, recomputing every derived attribute.
/// Empty cell sets are dropped.
Scene make_scene(int height, int width, std::uint8_t background,
                 std::vector<std::vector<Cell>> objects);

/// Connected same-color components of non-background cells, in order of
/// their first cell in row-major order.
Scene abstract_scene(const Grid& grid, const AbstractionConfig& config = {});
std::vector<SceneObject> abstract_objects(const Grid& grid, const AbstractionConfig& config = {});

/// Paints objects in order on a background canvas.
Grid render(const Scene& scene);

enum class ActionOp : std::uint8_t {
  kUpdateColor,
  kMove,
  kMoveMax,
  kExtend,
  kRotate,
  kFillRectangle,
  kHollowRectangle,
  kMirror,
  kAddBorder,
  kFlip,
  kNoOp,
};

/// A transform with its arguments resolved to concrete values.
struct Action {
  ActionOp op = ActionOp::kNoOp;
  std::int32_t a = 0;
  std::int32_t b = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

/// New cell set of object `obj` of `scene` after `action`, starting from
/// `cells` (the object's current cells, which may already differ from the
/// scene after earlier actions of the same rule). Cells leaving the grid are
/// clipped; result is sorted by position.
std::vector<Cell> apply_action(const Scene& scene, std::size_t obj, const std::vector<Cell>& cells,
                               const Action& action);

}  // namespace surrosynth::arc
