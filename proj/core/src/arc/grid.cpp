#include "surrosynth/arc/grid.hpp"

#include <array>
#include <sstream>

#include "surrosynth/grammar_io.hpp"

namespace surrosynth::arc {

namespace {

constexpr std::array<char, kNumColors> kLetters = {'O', 'B', 'R', 'G', 'Y', 'X', 'F', 'A', 'C', 'W'};
constexpr std::array<std::string_view, kNumColors> kNames = {
    "BLACK", "BLUE", "RED", "GREEN", "YELLOW", "GREY", "FUCHSIA", "ORANGE", "CYAN", "BROWN"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::uint8_t> parse_row(std::string_view line, int line_no) {
  std::vector<std::uint8_t> row;
  for (char ch : line) {
    if (ch == ' ' || ch == '\t' || ch == '\r') continue;
    auto color = color_from_letter(ch);
    if (!color) {
      throw ArcFormatError("unknown color letter '" + std::string(1, ch) + "' on line " +
                           std::to_string(line_no));
    }
    row.push_back(static_cast<std::uint8_t>(*color));
  }
  return row;
}

Grid rows_to_grid(const std::vector<std::vector<std::uint8_t>>& rows, int line_no) {
  if (rows.empty()) throw ArcFormatError("empty grid before line " + std::to_string(line_no));
  Grid g(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < g.height; ++r) {
    if (static_cast<int>(rows[r].size()) != g.width) {
      throw ArcFormatError("ragged grid rows before line " + std::to_string(line_no));
    }
    for (int c = 0; c < g.width; ++c) g.at(r, c) = rows[r][c];
  }
  return g;
}

}  // namespace

char color_letter(int color) { return kLetters.at(static_cast<std::size_t>(color)); }

std::string_view color_name(int color) { return kNames.at(static_cast<std::size_t>(color)); }

std::optional<int> color_from_letter(char letter) {
  for (int i = 0; i < kNumColors; ++i) {
    if (kLetters[i] == letter) return i;
  }
  return std::nullopt;
}

std::optional<int> color_from_name(std::string_view name) {
  for (int i = 0; i < kNumColors; ++i) {
    if (kNames[i] == name) return i;
  }
  return std::nullopt;
}

Grid parse_grid(std::string_view text) {
  std::vector<std::vector<std::uint8_t>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(parse_row(line, line_no));
  }
  return rows_to_grid(rows, line_no);
}

std::string format_grid(const Grid& grid) {
  std::string out;
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      if (c) out.push_back(' ');
      out.push_back(color_letter(grid.at(r, c)));
    }
    out.push_back('\n');
  }
  return out;
}

ArcTask parse_arc_task(std::string_view text, std::string name) {
  ArcTask task;
  task.name = std::move(name);
  enum class Section { kNone, kTrain, kTest } section = Section::kNone;
  enum class Block { kNone, kInput, kOutput } block = Block::kNone;
  std::vector<std::vector<std::uint8_t>> rows;
  std::optional<Grid> pending_input;
  int line_no = 0;

  auto flush = [&]() {
    if (block == Block::kNone) return;
    Grid g = rows_to_grid(rows, line_no);
    rows.clear();
    if (block == Block::kInput) {
      if (pending_input) throw ArcFormatError("INPUT without OUTPUT near line " + std::to_string(line_no));
      pending_input = std::move(g);
    } else {
      if (!pending_input) throw ArcFormatError("OUTPUT without INPUT near line " + std::to_string(line_no));
      auto& dest = section == Section::kTrain ? task.train : task.test;
      dest.push_back({std::move(*pending_input), std::move(g)});
      pending_input.reset();
    }
    block = Block::kNone;
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line == "TRAIN" || line == "TEST") {
      flush();
      if (pending_input) throw ArcFormatError("INPUT without OUTPUT near line " + std::to_string(line_no));
      section = line == "TRAIN" ? Section::kTrain : Section::kTest;
    } else if (line == "INPUT" || line == "OUTPUT") {
      flush();
      if (section == Section::kNone) throw ArcFormatError("grid outside TRAIN/TEST on line " + std::to_string(line_no));
      block = line == "INPUT" ? Block::kInput : Block::kOutput;
    } else {
      if (block == Block::kNone) throw ArcFormatError("unexpected text on line " + std::to_string(line_no));
      rows.push_back(parse_row(line, line_no));
    }
  }
  flush();
  if (pending_input) throw ArcFormatError("trailing INPUT without OUTPUT");
  if (task.train.empty()) throw ArcFormatError("task has no training pairs");
  return task;
}

ArcTask load_arc_task(const std::filesystem::path& path) {
  return parse_arc_task(read_text_file(path), path.stem().string());
}

std::string format_arc_task(const ArcTask& task) {
  std::string out;
  auto section = [&](const char* header, const std::vector<ArcPair>& pairs) {
    out += header;
    out += "\n";
    for (const auto& p : pairs) {
      out += "INPUT\n" + format_grid(p.input) + "OUTPUT\n" + format_grid(p.output);
    }
  };
  section("TRAIN", task.train);
  if (!task.test.empty()) section("TEST", task.test);
  return out;
}

}  // namespace surrosynth::arc
