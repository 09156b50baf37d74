#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace surrosynth::arc {

class ArcFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Color codes follow the usual ARC numbering.
enum Color : std::uint8_t {
  kBlack = 0,
  kBlue,
  kRed,
  kGreen,
  kYellow,
  kGrey,
  kFuchsia,
  kOrange,
  kCyan,
  kBrown,
};

inline constexpr int kNumColors = 10;

char color_letter(int color);                   // O B R G Y X F A C W
std::string_view color_name(int color);         // BLACK BLUE RED ...
std::optional<int> color_from_letter(char letter);
std::optional<int> color_from_name(std::string_view name);

struct Grid {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> cells;  // row-major

  Grid() = default;
  Grid(int h, int w, std::uint8_t fill = kBlack) : height(h), width(w), cells(std::size_t(h) * w, fill) {}

  bool contains(int r, int c) const { return r >= 0 && c >= 0 && r < height && c < width; }
  std::uint8_t at(int r, int c) const { return cells[std::size_t(r) * width + c]; }
  std::uint8_t& at(int r, int c) { return cells[std::size_t(r) * width + c]; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Rows of space-separated color letters.
Grid parse_grid(std::string_view text);
std::string format_grid(const Grid& grid);

struct ArcPair {
  Grid input;
  Grid output;
};

struct ArcTask {
  std::string name;
  std::vector<ArcPair> train;
  std::vector<ArcPair> test;
};

/// Task file layout: `TRAIN` and `TEST` section headers, each followed by
/// `INPUT` / `OUTPUT` blocks of grid rows. Lines starting with `#` are
/// comments.
ArcTask parse_arc_task(std::string_view text, std::string name = "");
ArcTask load_arc_task(const std::filesystem::path& path);
std::string format_arc_task(const ArcTask& task);

}  // namespace surrosynth::arc
