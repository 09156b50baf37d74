#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "surrosynth/arc/synth.hpp"
#include "surrosynth/parser.hpp"
#include "surrosynth/pcfg_learn.hpp"
#include "test_support.hpp"

namespace surrosynth::arc {

void PrintTo(const Grid& g, std::ostream* os) { *os << "\n" << format_grid(g); }

namespace {

const std::string kArcDir = std::string(SURROSYNTH_DATA_DIR) + "/tasks/arc/";
const std::string kCompletionDir = std::string(SURROSYNTH_DATA_DIR) + "/completions/arc/";

const char* kMinNeighborRule =
    "if color_of(self) == GREY && is_neighbor(self, other) && size_of(other) == MIN "
    "then update_color(color_of(other))";
const char* kNeighborRuleWithoutSize = "if color_of(self) == GREY && is_neighbor(self, other) then update_color(color_of(other))";

std::vector<std::string> load_completions(const std::string& name) {
  std::ifstream in(kCompletionDir + name + ".json");
  auto j = nlohmann::json::parse(in);
  return j.at("completions").get<std::vector<std::string>>();
}

Program parse_or_die(const Grammar& g, const std::string& text) {
  auto r = Parser(g).parse(text);
  if (!r) throw std::runtime_error("parse failed: " + r.failure.message + " in " + text);
  return *r.program;
}

Program parse_from(const Grammar& g, const std::string& text, const char* nt) {
  auto r = Parser(g).parse(text, *g.find_nonterminal(nt));
  if (!r) throw std::runtime_error("parse failed: " + r.failure.message + " in " + text);
  return *r.program;
}

std::vector<Scene> train_scenes(const ArcTask& task, const AbstractionConfig& config = {}) {
  std::vector<Scene> out;
  for (const auto& p : task.train) out.push_back(abstract_scene(p.input, config));
  return out;
}

std::vector<Grid> train_outputs(const ArcTask& task) {
  std::vector<Grid> out;
  for (const auto& p : task.train) out.push_back(p.output);
  return out;
}

std::set<std::pair<int, int>> positions(const std::vector<Cell>& cells) {
  std::set<std::pair<int, int>> out;
  for (const auto& c : cells) out.emplace(c.row, c.col);
  return out;
}

// ---------------------------------------------------------------------------
// Grids and task files

TEST(ArcGrid, ColorTablesRoundTrip) {
  EXPECT_EQ(color_letter(kBlack), 'O');
  EXPECT_EQ(color_letter(kRed), 'R');
  EXPECT_EQ(color_letter(kGrey), 'X');
  EXPECT_EQ(color_name(kFuchsia), "FUCHSIA");
  EXPECT_EQ(color_name(kCyan), "CYAN");
  for (int c = 0; c < kNumColors; ++c) {
    EXPECT_EQ(color_from_letter(color_letter(c)), c);
    EXPECT_EQ(color_from_name(color_name(c)), c);
  }
  EXPECT_FALSE(color_from_letter('Z'));
  EXPECT_FALSE(color_from_name("PINK"));
}

TEST(ArcGrid, ParseFormatRoundTrip) {
  const std::string text = "O R O\nX X O\n";
  const Grid g = parse_grid(text);
  EXPECT_EQ(g.height, 2);
  EXPECT_EQ(g.width, 3);
  EXPECT_EQ(g.at(0, 1), kRed);
  EXPECT_EQ(format_grid(g), text);
}

TEST(ArcGrid, MalformedInputNamesTheLine) {
  try {
    parse_arc_task("TRAIN\nINPUT\nO O\nO Q\nOUTPUT\nO O\nO O\n");
    FAIL();
  } catch (const ArcFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_arc_task("TRAIN\nINPUT\nO O\nO\nOUTPUT\nO O\n"), ArcFormatError);
  EXPECT_THROW(parse_arc_task("TRAIN\nINPUT\nO O\n"), ArcFormatError);
  EXPECT_THROW(parse_arc_task("INPUT\nO O\n"), ArcFormatError);
}

TEST(ArcGrid, TaskFileRoundTrip) {
  const ArcTask task = load_arc_task(kArcDir + "grey_neighbor_recolor.txt");
  EXPECT_EQ(task.name, "grey_neighbor_recolor");
  ASSERT_EQ(task.train.size(), 3u);
  ASSERT_EQ(task.test.size(), 1u);
  EXPECT_EQ(task.train[0].input.height, 10);
  const ArcTask again = parse_arc_task(format_arc_task(task));
  for (std::size_t k = 0; k < task.train.size(); ++k) {
    EXPECT_EQ(again.train[k].input, task.train[k].input);
    EXPECT_EQ(again.train[k].output, task.train[k].output);
  }
  EXPECT_EQ(again.test[0].output, task.test[0].output);
}

// ---------------------------------------------------------------------------
// Abstraction

TEST(ArcAbstraction, SinglePixel) {
  const auto objects = abstract_objects(parse_grid("R"));
  ASSERT_EQ(objects.size(), 1u);
  EXPECT_EQ(objects[0].size, 1);
  EXPECT_EQ(objects[0].color, kRed);
}

TEST(ArcAbstraction, LShapeNextToPixel) {
  const Scene s = abstract_scene(parse_grid(
      "O O O O O\n"
      "O X O O O\n"
      "O X O O O\n"
      "O X X R O\n"
      "O O O O O\n"));
  ASSERT_EQ(s.objects.size(), 2u);
  const auto& grey = s.objects[0];
  const auto& red = s.objects[1];
  EXPECT_EQ(grey.color, kGrey);
  EXPECT_EQ(grey.size, 4);
  EXPECT_EQ(red.color, kRed);
  EXPECT_EQ(red.size, s.min_attr[static_cast<int>(Attr::kSize)]);
  EXPECT_EQ(grey.size, s.max_attr[static_cast<int>(Attr::kSize)]);
  EXPECT_TRUE(s.is_neighbor(0, 1));
  EXPECT_TRUE(s.is_neighbor(1, 0));
}

TEST(ArcAbstraction, DiagonalPixelsDependOnConnectivity) {
  const Grid g = parse_grid("B O\nO B\n");
  EXPECT_EQ(abstract_objects(g).size(), 2u);
  AbstractionConfig eight;
  eight.connectivity = 8;
  const auto merged = abstract_objects(g, eight);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].size, 2);
}

TEST(ArcAbstraction, BackgroundOnlyGridHasNoObjects) {
  EXPECT_TRUE(abstract_objects(parse_grid("O O\nO O\n")).empty());
  AbstractionConfig blue_bg;
  blue_bg.background = kBlue;
  EXPECT_TRUE(abstract_objects(parse_grid("B B\n"), blue_bg).empty());
}

TEST(ArcAbstraction, ShapeTags) {
  const Scene s = abstract_scene(parse_grid(
      "G G G O B B\n"
      "G O G O B B\n"
      "G G G O O O\n"
      "O O O O R O\n"
      "O O O O R R\n"));
  ASSERT_EQ(s.objects.size(), 3u);
  EXPECT_EQ(s.objects[0].shape, Shape::kEnclosed);
  EXPECT_EQ(s.objects[1].shape, Shape::kSquare);
  EXPECT_EQ(s.objects[2].shape, Shape::kOther);
}

TEST(ArcAbstraction, NeighborsNeedLineOfSight) {
  // B blocks the view between the two reds; the yellow is only diagonal.
  const Scene s = abstract_scene(parse_grid(
      "R O B O R\n"
      "O O O O O\n"
      "O Y O O O\n"));
  ASSERT_EQ(s.objects.size(), 4u);
  EXPECT_TRUE(s.is_neighbor(0, 1));
  EXPECT_TRUE(s.is_neighbor(1, 2));
  EXPECT_FALSE(s.is_neighbor(0, 2));
  EXPECT_FALSE(s.is_neighbor(1, 3));
  EXPECT_FALSE(s.is_neighbor(0, 0));
  EXPECT_EQ(s.objects[1].degree, 2);
  EXPECT_EQ(s.objects[3].degree, 0);
}

TEST(ArcAbstraction, RenderReproducesInputProperty) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 9), w = 1 + static_cast<int>(rng() % 9);
    Grid g(h, w);
    const int palette = 1 + static_cast<int>(rng() % 4);
    for (auto& c : g.cells) c = rng() % 3 == 0 ? 0 : static_cast<std::uint8_t>(1 + rng() % palette);
    for (int conn : {4, 8}) {
      AbstractionConfig cfg;
      cfg.connectivity = conn;
      const Scene s = abstract_scene(g, cfg);
      ASSERT_EQ(render(s), g);
      for (const auto& o : s.objects) {
        ASSERT_FALSE(o.cells.empty());
        int r0 = 99, r1 = -1, c0 = 99, c1 = -1;
        for (const auto& c : o.cells) {
          ASSERT_EQ(c.color, o.color);
          r0 = std::min(r0, c.row);
          r1 = std::max(r1, c.row);
          c0 = std::min(c0, c.col);
          c1 = std::max(c1, c.col);
        }
        EXPECT_EQ(o.size, static_cast<int>(o.cells.size()));
        EXPECT_EQ(o.row, r0);
        EXPECT_EQ(o.column, c0);
        EXPECT_EQ(o.height, r1 - r0 + 1);
        EXPECT_EQ(o.width, c1 - c0 + 1);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Object transforms

Scene one_object(const char* text) { return abstract_scene(parse_grid(text)); }

Grid after(const Scene& s, std::size_t obj, const std::vector<Action>& actions) {
  std::vector<Cell> cells = s.objects[obj].cells;
  for (const auto& a : actions) cells = apply_action(s, obj, cells, a);
  Scene copy = s;
  copy.objects[obj].cells = cells;
  return render(copy);
}

TEST(ArcTransforms, MoveClipsAtTheBorder) {
  const Scene s = one_object("O O O\nO R R\n");
  EXPECT_EQ(after(s, 0, {{ActionOp::kMove, static_cast<int>(Dir::kUp)}}), parse_grid("O R R\nO O O\n"));
  EXPECT_EQ(after(s, 0, {{ActionOp::kMove, static_cast<int>(Dir::kRight)}}), parse_grid("O O O\nO O R\n"));
}

TEST(ArcTransforms, MoveMaxStopsAtObjectsAndBorder) {
  const Scene s = one_object("R O O B\nO O O O\n");
  EXPECT_EQ(after(s, 0, {{ActionOp::kMoveMax, static_cast<int>(Dir::kRight)}}), parse_grid("O O R B\nO O O O\n"));
  EXPECT_EQ(after(s, 0, {{ActionOp::kMoveMax, static_cast<int>(Dir::kDown)}}), parse_grid("O O O B\nR O O O\n"));
}

TEST(ArcTransforms, ExtendWithAndWithoutOverlap) {
  const Scene s = one_object("R O B O\n");
  EXPECT_EQ(after(s, 0, {{ActionOp::kExtend, static_cast<int>(Dir::kRight), 0}}), parse_grid("R R B O\n"));
  const auto cells = apply_action(s, 0, s.objects[0].cells, {ActionOp::kExtend, static_cast<int>(Dir::kRight), 1});
  EXPECT_EQ(positions(cells), (std::set<std::pair<int, int>>{{0, 0}, {0, 1}, {0, 2}, {0, 3}}));
}

TEST(ArcTransforms, RotateAndFlip) {
  const Scene s = one_object(
      "R O O\n"
      "R R O\n"
      "O O O\n");
  EXPECT_EQ(after(s, 0, {{ActionOp::kRotate, 90}}), parse_grid("R R O\nR O O\nO O O\n"));
  EXPECT_EQ(after(s, 0, {{ActionOp::kRotate, 180}}), parse_grid("R R O\nO R O\nO O O\n"));
  EXPECT_EQ(after(s, 0, {{ActionOp::kRotate, 270}}), parse_grid("O R O\nR R O\nO O O\n"));
  EXPECT_EQ(after(s, 0, {{ActionOp::kFlip, static_cast<int>(Axis::kVertical)}}), parse_grid("O R O\nR R O\nO O O\n"));
  EXPECT_EQ(after(s, 0, {{ActionOp::kFlip, static_cast<int>(Axis::kHorizontal)}}), parse_grid("R R O\nR O O\nO O O\n"));
  EXPECT_EQ(after(s, 0, {{ActionOp::kRotate, 90}, {ActionOp::kRotate, 270}}), render(s));
}

TEST(ArcTransforms, MirrorAddsAReflectedCopy) {
  const Scene s = one_object("R R O O\nR O O O\n");
  EXPECT_EQ(after(s, 0, {{ActionOp::kMirror, static_cast<int>(Axis::kVertical)}}), parse_grid("R R R R\nR O O R\n"));
}

TEST(ArcTransforms, BorderFillAndHollow) {
  const Scene ring = one_object(
      "O O O O O\n"
      "O G G G O\n"
      "O G O G O\n"
      "O G G G O\n");
  EXPECT_EQ(after(ring, 0, {{ActionOp::kFillRectangle, kRed, 0}}),
            parse_grid("O O O O O\nO G G G O\nO G R G O\nO G G G O\n"));
  const Scene dot = one_object("O O O\nO B O\nO O O\n");
  EXPECT_EQ(after(dot, 0, {{ActionOp::kAddBorder, kYellow}}), parse_grid("Y Y Y\nY B Y\nY Y Y\n"));
  const Scene block = one_object("C C C\nC C C\nC C C\n");
  EXPECT_EQ(after(block, 0, {{ActionOp::kHollowRectangle, kBlack}}), parse_grid("C C C\nC O C\nC C C\n"));
  EXPECT_EQ(after(block, 0, {{ActionOp::kUpdateColor, kBrown}}), parse_grid("W W W\nW W W\nW W W\n"));
}

// ---------------------------------------------------------------------------
// Grammar and semantics

TEST(ArcGrammar, LiteralPoolsComeFromTrainingInputs) {
  const ArcTask task = load_arc_task(kArcDir + "grey_neighbor_recolor.txt");
  const LiteralPools pools = literal_pools(task);
  EXPECT_EQ(pools.sizes, (std::vector<int>{1, 2, 4, 6, 8, 9, 12}));
  const auto g = build_arc_grammar(task);
  EXPECT_TRUE(g->find_terminal("4"));
  EXPECT_TRUE(g->find_terminal("is_neighbor"));
  EXPECT_EQ(g->nonterminal_name(g->start()), "$Program");
}

TEST(ArcGrammar, RendersInSourceSyntax) {
  const ArcTask task = load_arc_task(kArcDir + "grey_neighbor_recolor.txt");
  const auto g = build_arc_grammar(task);
  const Program p = parse_or_die(*g, kMinNeighborRule);
  EXPECT_EQ(render(*g, p), kMinNeighborRule);
  EXPECT_EQ(p.size(), 20u);
}

TEST(ArcGrammar, AllSampleCompletionsParse) {
  const ArcTask task = load_arc_task(kArcDir + "grey_neighbor_recolor.txt");
  const auto g = build_arc_grammar(task);
  const auto completions = load_completions("grey_neighbor_recolor");
  ASSERT_EQ(completions.size(), 10u);
  Parser parser(*g);
  for (const auto& c : completions) EXPECT_TRUE(parser.parse(c)) << c;
}

TEST(ArcSemanticsTest, RejectsForeignGrammar) {
  GrammarBuilder b("$S");
  b.add("$S", {"x"});
  const Grammar g = b.build();
  EXPECT_THROW(ArcSemantics(g, {}, 2), GrammarError);
}

// Independent evaluator for filters: attributes recomputed from cell lists,
// neighbors from pairwise row/column visibility.
class FilterOracle {
 public:
  FilterOracle(const Grammar& g, const Scene& s) : g_(g), s_(s) {
    std::vector<int> owner(std::size_t(s.height) * s.width, -1);
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      for (const auto& c : s.objects[i].cells) owner[std::size_t(c.row) * s.width + c.col] = static_cast<int>(i);
    }
    const std::size_t n = s.objects.size();
    nb_.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        for (const auto& a : s.objects[i].cells) {
          for (const auto& b : s.objects[j].cells) {
            if (a.row != b.row && a.col != b.col) continue;
            bool clear = true;
            const int dr = (b.row > a.row) - (b.row < a.row), dc = (b.col > a.col) - (b.col < a.col);
            for (int r = a.row + dr, c = a.col + dc; r != b.row || c != b.col; r += dr, c += dc) {
              clear = clear && owner[std::size_t(r) * s.width + c] < 0;
            }
            if (clear) nb_[i][j] = true;
          }
        }
      }
    }
    for (const Production& p : g.productions()) {
      if (g.nonterminal_name(p.lhs) == "$Obj") var_of_[p.id] = static_cast<int>(var_of_.size());
    }
  }

  int eval(const Program& p, const std::vector<int>& binding) const {
    const Production& pr = g_.production(p.production());
    const std::string& lhs = g_.nonterminal_name(pr.lhs);
    auto term = [&](std::size_t k) { return pr.rhs[k].is_terminal() ? g_.terminal_text(pr.rhs[k].id) : ""; };
    if (pr.rhs.size() == 1 && pr.rhs[0].is_nonterminal()) return eval(p.child(0), binding);
    if (lhs == "$Filter") {
      const int a = eval(p.child(0), binding), b = eval(p.child(1), binding);
      return term(1) == "&&" ? (a && b) : (a || b);
    }
    if (lhs == "$Atom") {
      if (term(0) == "not") return !eval(p.child(0), binding);
      const int a = eval(p.child(0), binding), b = eval(p.child(1), binding);
      if (term(0) == "is_neighbor") return nb_[a][b] ? 1 : 0;
      return a != kUndef && a == b;
    }
    if (lhs == "$Obj") return binding.at(var_of_.at(p.production()));
    const std::string attr = lhs.substr(1);
    if (pr.arity() == 1) return attribute(attr, eval(p.child(0), binding));
    const std::string t = term(0);
    if (t == "MIN" || t == "MAX") {
      int best = attribute(attr, 0);
      for (std::size_t j = 0; j < s_.objects.size(); ++j) {
        const int v = attribute(attr, static_cast<int>(j));
        best = t == "MIN" ? std::min(best, v) : std::max(best, v);
      }
      return best;
    }
    if (attr == "Color") return *color_from_name(t);
    if (attr == "Shape") return t == "ENCLOSED" ? 0 : t == "SQUARE" ? 1 : 2;
    return std::stoi(t);
  }

 private:
  int attribute(const std::string& attr, int obj) const {
    const auto& cells = s_.objects.at(obj).cells;
    int r0 = 99, r1 = -1, c0 = 99, c1 = -1;
    for (const auto& c : cells) {
      r0 = std::min(r0, c.row);
      r1 = std::max(r1, c.row);
      c0 = std::min(c0, c.col);
      c1 = std::max(c1, c.col);
    }
    if (attr == "Color") return cells[0].color;
    if (attr == "Size") return static_cast<int>(cells.size());
    if (attr == "Width") return c1 - c0 + 1;
    if (attr == "Height") return r1 - r0 + 1;
    if (attr == "Row") return r0;
    if (attr == "Column") return c0;
    if (attr == "Degree") return static_cast<int>(std::count(nb_[obj].begin(), nb_[obj].end(), true));
    // Shape: a hole is a non-object cell of the box that cannot reach the
    // outside of the box through non-object cells.
    const int h = r1 - r0 + 3, w = c1 - c0 + 3;
    std::vector<int> grid(std::size_t(h) * w, 0);
    for (const auto& c : cells) grid[std::size_t(c.row - r0 + 1) * w + (c.col - c0 + 1)] = 1;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    grid[0] = 2;
    while (!stack.empty()) {
      auto [r, c] = stack.back();
      stack.pop_back();
      for (auto [dr, dc] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int nr = r + dr, nc = c + dc;
        if (nr < 0 || nc < 0 || nr >= h || nc >= w || grid[std::size_t(nr) * w + nc]) continue;
        grid[std::size_t(nr) * w + nc] = 2;
        stack.emplace_back(nr, nc);
      }
    }
    if (std::count(grid.begin(), grid.end(), 0) > 0) return 0;
    const int bw = w - 2, bh = h - 2;
    return static_cast<int>(cells.size()) == bw * bh && bw == bh ? 1 : 2;
  }

  const Grammar& g_;
  const Scene& s_;
  std::vector<std::vector<bool>> nb_;
  std::map<ProductionId, int> var_of_;
};

TEST(ArcSemanticsTest, FiltersAgreeWithIndependentOracle) {
  const ArcTask task = load_arc_task(kArcDir + "grey_neighbor_recolor.txt");
  const auto g = build_arc_grammar(task);
  const auto scenes = train_scenes(task);
  const ArcSemantics sem(*g, scenes, 2);
  std::vector<FilterOracle> oracles;
  for (const auto& s : scenes) oracles.emplace_back(*g, s);
  surrosynth::testing::ProgramSampler sampler(*g);
  std::mt19937_64 rng(11);
  const SymbolId filter_nt = *g->find_nonterminal("$Filter");
  for (int trial = 0; trial < 400; ++trial) {
    const Program p = sampler.sample(filter_nt, rng, 5);
    const auto v = evaluate(sem, p);
    ASSERT_EQ(v.size(), sem.num_contexts());
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::size_t scene = sem.context_scene(k);
      const std::vector<int> binding{sem.context_object(k, 0), sem.context_object(k, 1)};
      ASSERT_EQ(v[k], oracles[scene].eval(p, binding)) << render(*g, p) << " context " << k;
    }
  }
}

TEST(ArcSemanticsTest, TransformEffectsMatchDirectApplication) {
  const ArcTask task = load_arc_task(kArcDir + "grey_neighbor_recolor.txt");
  const auto g = build_arc_grammar(task);
  const auto scenes = train_scenes(task);
  const ArcSemantics sem(*g, scenes, 2);
  surrosynth::testing::ProgramSampler sampler(*g);
  std::mt19937_64 rng(5);
  const SymbolId nt = *g->find_nonterminal("$Transforms");
  for (int trial = 0; trial < 200; ++trial) {
    const Program p = sampler.sample(nt, rng, 3);
    const auto v = evaluate(sem, p);
    for (std::size_t k = 0; k < v.size(); k += 7) {
      if (v[k] == kUndef) continue;
      const std::size_t scene = sem.context_scene(k);
      const std::size_t self = static_cast<std::size_t>(sem.context_object(k, 0));
      std::vector<Cell> cells = scenes[scene].objects[self].cells;
      for (const Action& a : sem.actions(v[k])) cells = apply_action(scenes[scene], self, cells, a);
      EXPECT_EQ(sem.effect_cells(sem.effect(v[k], scene, self)), cells) << render(*g, p);
    }
  }
}

TEST(ArcSemanticsTest, DirectionAndAxisAreRelativeToSelf) {
  GrammarBuilder unused("$S");
  const ArcTask task = parse_arc_task("TRAIN\nINPUT\nR O O\nO O O\nO O B\nOUTPUT\nR O O\nO O O\nO O B\n");
  const auto g = build_arc_grammar(task);
  const ArcSemantics sem(*g, train_scenes(task), 2);
  const auto dir = evaluate(sem, parse_from(*g, "dir_of(other)", "$Dir"));
  const auto axis = evaluate(sem, parse_from(*g, "axis_of(other)", "$Axis"));
  // Contexts: (0,0) (0,1) (1,0) (1,1).
  EXPECT_EQ(dir[0], kUndef);
  EXPECT_EQ(dir[1], static_cast<int>(Dir::kDownRight));
  EXPECT_EQ(dir[2], static_cast<int>(Dir::kUpLeft));
  EXPECT_EQ(axis[1], static_cast<int>(Axis::kLeftDiagonal));
}

// ---------------------------------------------------------------------------
// Rule programs

TEST(ArcEval, ContradictoryFilterLeavesGridUnchanged) {
  const ArcTask task = load_arc_task(kArcDir + "grey_neighbor_recolor.txt");
  const auto g = build_arc_grammar(task);
  const Program p = parse_or_die(*g, "if color_of(self) == RED && not (color_of(self) == RED) then update_color(BLUE)");
  for (const auto& pair : task.train) EXPECT_EQ(eval_rule_program(*g, p, pair.input), pair.input);
}

TEST(ArcEval, MinNeighborRuleRecolorsGreyObjects) {
  const ArcTask task = load_arc_task(kArcDir + "grey_neighbor_recolor.txt");
  const auto g = build_arc_grammar(task);
  const Program p = parse_or_die(*g, kMinNeighborRule);
  for (const auto& pair : task.train) EXPECT_EQ(eval_rule_program(*g, p, pair.input), pair.output);
  EXPECT_EQ(eval_rule_program(*g, p, task.test[0].input), task.test[0].output);
}

TEST(ArcEval, AmbiguousWitnessIsUndefined) {
  const ArcTask task = load_arc_task(kArcDir + "grey_neighbor_recolor.txt");
  const auto g = build_arc_grammar(task);
  const Program p = parse_or_die(*g, kNeighborRuleWithoutSize);
  for (const auto& pair : task.train) EXPECT_FALSE(eval_rule_program(*g, p, pair.input).has_value());
}

TEST(ArcEval, RulesApplyInSequence) {
  const ArcTask task = load_arc_task(kArcDir + "two_color_recolor.txt");
  const auto g = build_arc_grammar(task);
  const Grid in = parse_grid("B O G\n");
  const Program chained = parse_or_die(
      *g, "if color_of(self) == BLUE then update_color(RED) ; if color_of(self) == RED then update_color(GREEN)");
  EXPECT_EQ(eval_rule_program(*g, chained, in), parse_grid("G O G\n"));
  const Program swapped = parse_or_die(
      *g, "if color_of(self) == RED then update_color(GREEN) ; if color_of(self) == BLUE then update_color(RED)");
  EXPECT_EQ(eval_rule_program(*g, swapped, in), parse_grid("R O G\n"));
}

TEST(ArcEval, TransformListRunsLeftToRight) {
  const ArcTask task = load_arc_task(kArcDir + "two_color_recolor.txt");
  const auto g = build_arc_grammar(task);
  const Program p = parse_or_die(*g, "if color_of(self) == BLUE then update_color(RED) ; move(RIGHT)");
  EXPECT_EQ(eval_rule_program(*g, p, parse_grid("B O O\n")), parse_grid("O R O\n"));
}

TEST(ArcEval, AssembleMatchesParsedProgram) {
  const ArcTask task = load_arc_task(kArcDir + "grey_neighbor_recolor.txt");
  const auto g = build_arc_grammar(task);
  const Program filter = parse_from(*g, "color_of(self) == BLUE", "$Filter");
  const Program transform = parse_from(*g, "update_color(RED)", "$Transform");
  const Program p = assemble_rule_program(*g, {{filter, transform}, {filter, transform}});
  EXPECT_EQ(render(*g, p), "if color_of(self) == BLUE then update_color(RED) ; if color_of(self) == BLUE then update_color(RED)");
  EXPECT_EQ(p, parse_or_die(*g, render(*g, p)));
}

// ---------------------------------------------------------------------------
// Transform and filter search

struct Prepared {
  ArcTask task;
  std::shared_ptr<const Grammar> grammar;
  std::unique_ptr<ArcSemantics> sem;
  std::vector<Grid> outputs;
};

Prepared prepare(const std::string& name) {
  Prepared p;
  p.task = load_arc_task(kArcDir + name + ".txt");
  p.grammar = build_arc_grammar(p.task);
  p.sem = std::make_unique<ArcSemantics>(*p.grammar, train_scenes(p.task), 2);
  p.outputs = train_outputs(p.task);
  return p;
}

std::vector<ObjectRef> objects_where(const ArcSemantics& sem, std::uint8_t color) {
  std::vector<ObjectRef> out;
  for (std::size_t p = 0; p < sem.scenes().size(); ++p) {
    for (std::size_t i = 0; i < sem.scenes()[p].objects.size(); ++i) {
      if (sem.scenes()[p].objects[i].color == color) out.push_back({std::uint32_t(p), std::uint32_t(i)});
    }
  }
  return out;
}

std::vector<ObjectRef> all_objects(const ArcSemantics& sem) {
  std::vector<ObjectRef> out;
  for (std::size_t p = 0; p < sem.scenes().size(); ++p) {
    for (std::size_t i = 0; i < sem.scenes()[p].objects.size(); ++i) out.push_back({std::uint32_t(p), std::uint32_t(i)});
  }
  return out;
}

// Objects a filter selects, i.e. with at least one satisfying binding.
std::vector<ObjectRef> selected(const ArcSemantics& sem, const ArcSemantics::Value& f) {
  std::vector<ObjectRef> out;
  for (const auto& o : all_objects(sem)) {
    const std::size_t b = sem.block_begin(o.pair, o.object);
    bool any = false;
    for (std::size_t k = b; k < b + sem.block_size(o.pair); ++k) any = any || f[k];
    if (any) out.push_back(o);
  }
  return out;
}

TEST(ArcTransformSearch, IdentityIsCoveredByNoOpFirst) {
  const Prepared p = prepare("identity");
  const auto wg = WeightedGrammar::uniform(p.grammar);
  const TransformCover cover = transform_search(wg, *p.sem, p.outputs);
  EXPECT_TRUE(cover.targets.empty());
  ASSERT_TRUE(cover.complete);
  ASSERT_EQ(cover.items.size(), 1u);
  EXPECT_EQ(render(*p.grammar, cover.items[0].transform), "NoOp");
  EXPECT_EQ(cover.stats.level_reached, 1);
  EXPECT_EQ(cover.items[0].covered, all_objects(*p.sem));
}

TEST(ArcTransformSearch, RecolorAllIsCoveredByOneTransform) {
  const Prepared p = prepare("recolor_to_yellow");
  const auto wg = WeightedGrammar::uniform(p.grammar);
  const TransformCover cover = transform_search(wg, *p.sem, p.outputs);
  ASSERT_TRUE(cover.complete);
  EXPECT_EQ(cover.targets, all_objects(*p.sem));
  ASSERT_FALSE(cover.items.empty());
  EXPECT_EQ(render(*p.grammar, cover.items.back().transform), "update_color(YELLOW)");
  EXPECT_EQ(cover.items.back().covered, all_objects(*p.sem));
}

TEST(ArcTransformSearch, NeighborColorTransformCoversTheGreyObjects) {
  const Prepared p = prepare("grey_neighbor_recolor");
  EXPECT_EQ(TransformSearch(WeightedGrammar::uniform(p.grammar), *p.sem, p.outputs).cover().targets,
            objects_where(*p.sem, kGrey));
  const auto wg = WeightedGrammar::uniform(p.grammar);
  TransformSearch search(wg, *p.sem, p.outputs);
  while (search.step({})) {
  }
  EXPECT_EQ(search.stop_reason(), StopReason::kExhausted);
  const auto& items = search.cover().items;
  auto it = std::find_if(items.begin(), items.end(), [&](const CoverItem& c) {
    return render(*p.grammar, c.transform) == "update_color(color_of(other))";
  });
  ASSERT_NE(it, items.end());
  std::vector<ObjectRef> changed;
  const auto greys = objects_where(*p.sem, kGrey);
  std::set_intersection(it->covered.begin(), it->covered.end(), greys.begin(), greys.end(), std::back_inserter(changed));
  EXPECT_EQ(changed, greys);
  // Each single color is correct for only some of the grey objects.
  for (const auto& c : items) {
    if (&c == &*it) continue;
    std::vector<ObjectRef> part;
    std::set_intersection(c.covered.begin(), c.covered.end(), greys.begin(), greys.end(), std::back_inserter(part));
    EXPECT_LT(part.size(), greys.size()) << render(*p.grammar, c.transform);
  }
}

TEST(ArcTransformSearch, CoverSoundnessProperty) {
  for (const char* name : {"grey_neighbor_recolor", "recolor_to_yellow", "two_color_recolor", "identity"}) {
    const Prepared p = prepare(name);
    const auto wg = WeightedGrammar::uniform(p.grammar);
    TransformSearch search(wg, *p.sem, p.outputs);
    while (search.step({})) {
    }
    for (const auto& item : search.cover().items) {
      for (const auto& o : item.covered) {
        const Scene& s = p.sem->scenes()[o.pair];
        const std::size_t b = p.sem->block_begin(o.pair, o.object);
        bool found = false;
        for (std::size_t k = b; k < b + p.sem->block_size(o.pair) && !found; ++k) {
          if (!item.ok[k]) continue;
          // The transformed cells are present in the output, and the cells
          // left behind are background there.
          const auto& cells = p.sem->effect_cells(item.effects[k]);
          bool present = true;
          for (const auto& c : cells) present = present && p.outputs[o.pair].at(c.row, c.col) == c.color;
          const auto now = positions(cells);
          for (const auto& c : s.objects[o.object].cells) {
            if (!now.count({c.row, c.col})) present = present && p.outputs[o.pair].at(c.row, c.col) == s.background;
          }
          found = present;
        }
        EXPECT_TRUE(found) << name << " " << render(*p.grammar, item.transform);
      }
    }
  }
}

TEST(ArcFilterSearch, SingleTransformOverEverythingTakesATrivialFilter) {
  const Prepared p = prepare("recolor_to_yellow");
  const auto wg = WeightedGrammar::uniform(p.grammar);
  TransformCover cover = transform_search(wg, *p.sem, p.outputs);
  cover.items = {cover.items.back()};
  const SolutionMap m = filter_search(wg, *p.sem, cover);
  ASSERT_TRUE(m.complete());
  const auto f = evaluate(*p.sem, *m.entries[0].filter);
  EXPECT_TRUE(std::all_of(f.begin(), f.end(), [](int x) { return x == 1; })) << render(*p.grammar, *m.entries[0].filter);
  EXPECT_LE(m.entries[0].filter->size(), 4u);
}

TEST(ArcFilterSearch, NeighborFilterPinsAUniqueWitness) {
  const Prepared p = prepare("grey_neighbor_recolor");
  const auto wg = WeightedGrammar::uniform(p.grammar);
  TransformSearch search(wg, *p.sem, p.outputs);
  while (search.step({})) {
  }
  TransformCover cover = search.cover();
  auto it = std::find_if(cover.items.begin(), cover.items.end(), [&](const CoverItem& c) {
    return render(*p.grammar, c.transform) == "update_color(color_of(other))";
  });
  ASSERT_NE(it, cover.items.end());
  cover.items = {*it};
  const SolutionMap m = filter_search(wg, *p.sem, cover, SearchBudget::seconds(120));
  ASSERT_TRUE(m.complete());
  const auto f = evaluate(*p.sem, *m.entries[0].filter);
  EXPECT_EQ(selected(*p.sem, f), objects_where(*p.sem, kGrey)) << render(*p.grammar, *m.entries[0].filter);
  for (const auto& o : objects_where(*p.sem, kGrey)) {
    std::set<int> colors;
    const std::size_t b = p.sem->block_begin(o.pair, o.object);
    for (std::size_t k = b; k < b + p.sem->block_size(o.pair); ++k) {
      if (f[k]) colors.insert(p.sem->scenes()[o.pair].objects[p.sem->context_object(k, 1)].color);
    }
    ASSERT_EQ(colors.size(), 1u);
    const auto& cell = p.sem->scenes()[o.pair].objects[o.object].cells[0];
    EXPECT_EQ(*colors.begin(), p.outputs[o.pair].at(cell.row, cell.col));
  }
  // The hand-written rule's filter is accepted for the same cover.
  FilterSearch fs(wg, *p.sem);
  std::vector<FilterRole> roles;
  for (const auto& o : all_objects(*p.sem)) {
    roles.push_back(p.sem->scenes()[o.pair].objects[o.object].color == kGrey ? FilterRole::kMust : FilterRole::kFree);
  }
  const Program min_neighbor_filter =
      parse_from(*p.grammar, "color_of(self) == GREY && is_neighbor(self, other) && size_of(other) == MIN", "$Filter");
  EXPECT_TRUE(fs.accepts(evaluate(*p.sem, min_neighbor_filter), cover.items[0], roles));
  const Program loose = parse_from(*p.grammar, "color_of(self) == GREY && is_neighbor(self, other)", "$Filter");
  EXPECT_FALSE(fs.accepts(evaluate(*p.sem, loose), cover.items[0], roles));
}

TEST(ArcFilterSearch, TwoColorsGiveTwoSingleAtomFilters) {
  const Prepared p = prepare("two_color_recolor");
  const auto wg = WeightedGrammar::uniform(p.grammar);
  TransformSearch search(wg, *p.sem, p.outputs);
  while (search.step({})) {
  }
  TransformCover cover = search.cover();
  std::vector<CoverItem> chosen;
  for (const auto& item : cover.items) {
    const std::string t = render(*p.grammar, item.transform);
    if (t == "update_color(RED)" || t == "update_color(YELLOW)") chosen.push_back(item);
  }
  ASSERT_EQ(chosen.size(), 2u);
  cover.items = chosen;
  const SolutionMap m = filter_search(wg, *p.sem, cover);
  ASSERT_TRUE(m.complete());
  const SymbolId atom = *p.grammar->find_nonterminal("$Atom");
  for (std::size_t k = 0; k < 2; ++k) {
    const Program& f = *m.entries[k].filter;
    ASSERT_EQ(f.children().size(), 1u);
    EXPECT_EQ(p.grammar->production(f.child(0).production()).lhs, atom);
    const auto expect = objects_where(*p.sem, render(*p.grammar, m.entries[k].transform) == "update_color(RED)" ? kBlue : kGreen);
    EXPECT_EQ(selected(*p.sem, evaluate(*p.sem, f)), expect) << render(*p.grammar, f);
  }
}

// ---------------------------------------------------------------------------
// End to end

WeightedGrammar guided(const std::shared_ptr<const Grammar>& g, const std::string& name) {
  const auto set = make_completion_set(name, load_completions(name), *g, LearnMode::kNonStrict);
  return learn(g, set, LearnMode::kNonStrict);
}

TEST(ArcSynth, IdentityTaskGivesANoOpRule) {
  const Prepared p = prepare("identity");
  const auto wg = WeightedGrammar::uniform(p.grammar);
  const ArcSynthResult r = synth_arc(p.task, wg, wg);
  ASSERT_TRUE(r.program) << r.failure;
  EXPECT_TRUE(r.text.starts_with("if ")) << r.text;
  EXPECT_TRUE(r.text.ends_with(" then NoOp")) << r.text;
  EXPECT_TRUE(r.test_correct);
}

TEST(ArcSynth, GuidedSearchSolvesTheNeighborTask) {
  const Prepared p = prepare("grey_neighbor_recolor");
  const auto wg = guided(p.grammar, "grey_neighbor_recolor");
  ArcSynthOptions options;
  options.timeout_s = 300;
  const ArcSynthResult r = synth_arc(p.task, wg, wg, options);
  ASSERT_TRUE(r.program) << r.failure;
  EXPECT_TRUE(r.test_correct) << r.text;
  const Program min_neighbor = parse_or_die(*p.grammar, kMinNeighborRule);
  for (const auto* pairs : {&p.task.train, &p.task.test}) {
    for (const auto& pair : *pairs) {
      EXPECT_EQ(eval_rule_program(*p.grammar, *r.program, pair.input), eval_rule_program(*p.grammar, min_neighbor, pair.input));
    }
  }
}

TEST(ArcSynth, GuidanceEnumeratesFewerCandidates) {
  for (const char* name : {"recolor_to_yellow", "grey_neighbor_recolor"}) {
    const Prepared p = prepare(name);
    ArcSynthOptions options;
    options.timeout_s = 300;
    const auto wg = guided(p.grammar, name);
    const auto wu = WeightedGrammar::uniform(p.grammar);
    const ArcSynthResult g = synth_arc(p.task, wg, wg, options);
    const ArcSynthResult u = synth_arc(p.task, wu, wu, options);
    ASSERT_TRUE(g.program) << name << ": " << g.failure;
    ASSERT_TRUE(u.program) << name << ": " << u.failure;
    EXPECT_LT(g.enumerated(), u.enumerated()) << name;
  }
}

TEST(ArcSynth, SolutionsReproduceEveryTrainingPair) {
  for (const char* name : {"grey_neighbor_recolor", "recolor_to_yellow", "two_color_recolor", "identity"}) {
    const Prepared p = prepare(name);
    const auto wg = WeightedGrammar::uniform(p.grammar);
    const ArcSynthResult r = synth_arc(p.task, wg, wg);
    ASSERT_TRUE(r.program) << name << ": " << r.failure;
    for (const auto& pair : p.task.train) EXPECT_EQ(eval_rule_program(*p.grammar, *r.program, pair.input), pair.output);
    EXPECT_TRUE(r.test_correct) << name << ": " << r.text;
  }
}

TEST(ArcSynth, UnsolvableTaskFailsCleanly) {
  // The output invents a cell no transform of the object can produce.
  const ArcTask task = parse_arc_task("TRAIN\nINPUT\nR O O\nOUTPUT\nG O B\n");
  const auto g = build_arc_grammar(task);
  const auto wg = WeightedGrammar::uniform(g);
  ArcSynthOptions options;
  options.timeout_s = 5;
  const ArcSynthResult r = synth_arc(task, wg, wg, options);
  EXPECT_FALSE(r.program);
  EXPECT_FALSE(r.failure.empty());
}

}  // namespace
}  // namespace surrosynth::arc
