#include "surrosynth/arc/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <set>

#include "surrosynth/search.hpp"

namespace surrosynth::arc {

namespace {

struct AttrNt {
  const char* nonterminal;
  const char* accessor;
  Attr attr;
};

constexpr AttrNt kAttrNts[] = {
    {"$Color", "color_of", Attr::kColor},   {"$Size", "size_of", Attr::kSize},
    {"$Degree", "degree_of", Attr::kDegree}, {"$Width", "width_of", Attr::kWidth},
    {"$Height", "height_of", Attr::kHeight}, {"$Shape", "shape_of", Attr::kShape},
    {"$Row", "row_of", Attr::kRow},         {"$Column", "column_of", Attr::kColumn},
};

struct TransformSpec {
  const char* name;
  ActionOp op;
  std::vector<const char*> args;
};

const std::vector<TransformSpec>& transform_specs() {
  static const std::vector<TransformSpec> specs = {
      {"update_color", ActionOp::kUpdateColor, {"$Color"}},
      {"move", ActionOp::kMove, {"$Dir"}},
      {"move_max", ActionOp::kMoveMax, {"$Dir"}},
      {"extend", ActionOp::kExtend, {"$Dir", "$Overlap"}},
      {"rotate", ActionOp::kRotate, {"$Angle"}},
      {"fill_rectangle", ActionOp::kFillRectangle, {"$Color", "$Overlap"}},
      {"hollow_rectangle", ActionOp::kHollowRectangle, {"$Color"}},
      {"mirror", ActionOp::kMirror, {"$Axis"}},
      {"add_border", ActionOp::kAddBorder, {"$Color"}},
      {"flip", ActionOp::kFlip, {"$Axis"}},
  };
  return specs;
}

std::vector<std::string> call(const std::string& name, const std::vector<std::string>& args) {
  std::vector<std::string> rhs{name, "("};
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) rhs.push_back(",");
    rhs.push_back(args[i]);
  }
  rhs.push_back(")");
  return rhs;
}

std::optional<std::int32_t> parse_int(std::string_view s) {
  std::int32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

void append_bytes(std::string& key, std::int32_t v) {
  char buf[sizeof v];
  std::memcpy(buf, &v, sizeof v);
  key.append(buf, sizeof v);
}

int sign(int v) { return (v > 0) - (v < 0); }

}  // namespace

LiteralPools literal_pools(const ArcTask& task, const AbstractionConfig& config) {
  std::set<int> sizes, degrees, widths, heights;
  for (const auto& pair : task.train) {
    for (const auto& o : abstract_objects(pair.input, config)) {
      sizes.insert(o.size);
      degrees.insert(o.degree);
      widths.insert(o.width);
      heights.insert(o.height);
    }
  }
  return {{sizes.begin(), sizes.end()},
          {degrees.begin(), degrees.end()},
          {widths.begin(), widths.end()},
          {heights.begin(), heights.end()}};
}

Grammar build_arc_grammar(const LiteralPools& pools, const std::vector<std::string>& variables) {
  if (variables.empty()) throw GrammarError("ARC grammar needs at least one object variable");
  GrammarBuilder b("$Program");
  for (const char* nt : {"$Program", "$Rule", "$Filter", "$Atom", "$Transforms", "$Transform", "$Obj"}) {
    b.declare(nt);
  }
  for (const auto& a : kAttrNts) b.declare(a.nonterminal);
  for (const char* nt : {"$Dir", "$Axis", "$Overlap", "$Angle"}) b.declare(nt);

  b.add("$Program", {"$Rule"});
  b.add("$Program", {"$Rule", ";", "$Program"}, ";");
  b.add("$Rule", {"if", "$Filter", "then", "$Transforms"}, "if");

  b.add("$Filter", {"$Atom"});
  b.add("$Filter", {"$Atom", "&&", "$Filter"}, "&&");
  b.add("$Filter", {"$Atom", "||", "$Filter"}, "||");

  b.add("$Atom", call("not", {"$Atom"}), "not");
  for (const auto& a : kAttrNts) b.add("$Atom", {a.nonterminal, "==", a.nonterminal}, "==");
  b.add("$Atom", call("is_neighbor", {"$Obj", "$Obj"}), "is_neighbor");

  b.add("$Transforms", {"$Transform"});
  b.add("$Transforms", {"$Transform", ";", "$Transforms"}, ";");
  for (const auto& t : transform_specs()) {
    b.add("$Transform", call(t.name, {t.args.begin(), t.args.end()}), t.name);
  }
  b.add("$Transform", {"NoOp"}, "NoOp");

  for (const auto& v : variables) b.add("$Obj", {GrammarBuilder::escape_terminal(v)});

  auto numeric = [&](const char* nt, const std::vector<int>& pool) {
    b.add(nt, {"MIN"});
    b.add(nt, {"MAX"});
    for (int v : pool) b.add(nt, {std::to_string(v)});
  };
  for (const auto& a : kAttrNts) {
    b.add(a.nonterminal, call(a.accessor, {"$Obj"}), a.accessor);
    switch (a.attr) {
      case Attr::kColor:
        for (int c = 0; c < kNumColors; ++c) b.add("$Color", {std::string(color_name(c))});
        break;
      case Attr::kShape:
        for (int s = 0; s < kNumShapes; ++s) b.add("$Shape", {std::string(shape_name(static_cast<Shape>(s)))});
        break;
      case Attr::kSize: numeric("$Size", pools.sizes); break;
      case Attr::kDegree: numeric("$Degree", pools.degrees); break;
      case Attr::kWidth: numeric("$Width", pools.widths); break;
      case Attr::kHeight: numeric("$Height", pools.heights); break;
      case Attr::kRow:
      case Attr::kColumn: numeric(a.nonterminal, {}); break;
    }
  }
  b.add("$Dir", call("dir_of", {"$Obj"}), "dir_of");
  for (int d = 0; d < kNumDirs; ++d) b.add("$Dir", {std::string(dir_name(static_cast<Dir>(d)))});
  b.add("$Axis", call("axis_of", {"$Obj"}), "axis_of");
  for (int a = 0; a < kNumAxes; ++a) b.add("$Axis", {std::string(axis_name(static_cast<Axis>(a)))});
  b.add("$Overlap", {"TRUE"});
  b.add("$Overlap", {"FALSE"});
  for (const char* angle : {"90", "180", "270"}) b.add("$Angle", {angle});
  return b.build();
}

std::shared_ptr<const Grammar> build_arc_grammar(const ArcTask& task, const ArcDslConfig& config) {
  return std::make_shared<const Grammar>(
      build_arc_grammar(literal_pools(task, config.abstraction), config.variables));
}

ArcSemantics::ArcSemantics(const Grammar& grammar, std::vector<Scene> scenes, std::size_t num_variables)
    : grammar_(&grammar), scenes_(std::move(scenes)), num_vars_(num_variables) {
  if (num_vars_ == 0) throw GrammarError("ARC semantics needs at least one object variable");

  for (std::size_t p = 0; p < scenes_.size(); ++p) {
    const std::size_t n = scenes_[p].objects.size();
    std::size_t block = 1;
    for (std::size_t v = 1; v < num_vars_; ++v) block *= n;
    scene_begin_.push_back(ctx_scene_.size());
    block_size_.push_back(block);
    std::vector<std::int32_t> vars(num_vars_, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < block; ++t) {
        vars[0] = static_cast<std::int32_t>(i);
        std::size_t rest = t;
        for (std::size_t v = num_vars_; v-- > 1;) {
          vars[v] = static_cast<std::int32_t>(rest % n);
          rest /= n;
        }
        ctx_scene_.push_back(static_cast<std::uint32_t>(p));
        ctx_vars_.insert(ctx_vars_.end(), vars.begin(), vars.end());
      }
    }
  }

  const auto& g = grammar;
  auto lhs_name = [&](const Production& p) -> const std::string& { return g.nonterminal_name(p.lhs); };
  auto term = [&](const Production& p, std::size_t k) -> std::string {
    if (k >= p.rhs.size() || !p.rhs[k].is_terminal()) return {};
    return g.terminal_text(p.rhs[k].id);
  };
  std::int32_t next_variable = 0;
  for (const Production& p : g.productions()) {
    Meaning m;
    const std::string& lhs = lhs_name(p);
    const std::string first = term(p, 0);
    auto fail = [&]() { throw GrammarError("no ARC meaning for production " + g.describe(p.id)); };
    const AttrNt* attr_nt = nullptr;
    for (const auto& a : kAttrNts) {
      if (lhs == a.nonterminal) attr_nt = &a;
    }

    if (p.rhs.size() == 1 && p.rhs[0].is_nonterminal()) {
      m.kind = Kind::kChain;
    } else if (lhs == "$Program" || lhs == "$Rule") {
      m.kind = Kind::kStructural;
    } else if (lhs == "$Transforms") {
      if (p.arity() != 2 || term(p, 1) != ";") fail();
      m.kind = Kind::kSequence;
    } else if (lhs == "$Filter") {
      const std::string op = term(p, 1);
      if (op == "&&") m.kind = Kind::kAnd;
      else if (op == "||") m.kind = Kind::kOr;
      else fail();
    } else if (lhs == "$Atom") {
      if (first == "not") m.kind = Kind::kNot;
      else if (first == "is_neighbor") m.kind = Kind::kNeighbor;
      else if (term(p, 1) == "==" && p.arity() == 2) m.kind = Kind::kEq;
      else fail();
    } else if (lhs == "$Transform") {
      m.kind = Kind::kTransform;
      if (first == "NoOp") {
        m.op = ActionOp::kNoOp;
      } else {
        auto it = std::find_if(transform_specs().begin(), transform_specs().end(),
                               [&](const TransformSpec& t) { return first == t.name; });
        if (it == transform_specs().end() || it->args.size() != p.arity()) fail();
        m.op = it->op;
      }
    } else if (lhs == "$Obj") {
      if (p.rhs.size() != 1 || !p.rhs[0].is_terminal()) fail();
      m.kind = Kind::kVariable;
      m.value = next_variable++;
      if (static_cast<std::size_t>(m.value) >= num_vars_) fail();
    } else if (p.arity() == 1 && (first == "dir_of" || first == "axis_of")) {
      m.kind = first == "dir_of" ? Kind::kDirOf : Kind::kAxisOf;
    } else if (attr_nt && p.arity() == 1) {
      if (first != attr_nt->accessor) fail();
      m.kind = Kind::kAttrOf;
      m.attr = attr_nt->attr;
    } else if (p.rhs.size() == 1 && p.rhs[0].is_terminal()) {
      const std::string& text = first;
      if (attr_nt) m.attr = attr_nt->attr;
      if (text == "MIN" && attr_nt) {
        m.kind = Kind::kMin;
      } else if (text == "MAX" && attr_nt) {
        m.kind = Kind::kMax;
      } else {
        m.kind = Kind::kConst;
        std::optional<std::int32_t> v;
        if (lhs == "$Color") {
          if (auto c = color_from_name(text)) v = *c;
        } else if (lhs == "$Shape") {
          for (int s = 0; s < kNumShapes; ++s) {
            if (shape_name(static_cast<Shape>(s)) == text) v = s;
          }
        } else if (lhs == "$Dir") {
          for (int d = 0; d < kNumDirs; ++d) {
            if (dir_name(static_cast<Dir>(d)) == text) v = d;
          }
        } else if (lhs == "$Axis") {
          for (int a = 0; a < kNumAxes; ++a) {
            if (axis_name(static_cast<Axis>(a)) == text) v = a;
          }
        } else if (lhs == "$Overlap") {
          if (text == "TRUE") v = 1;
          if (text == "FALSE") v = 0;
        } else {
          v = parse_int(text);
        }
        if (!v) fail();
        m.value = *v;
      }
    } else {
      fail();
    }
    meanings_.push_back(m);
  }
  if (static_cast<std::size_t>(next_variable) != num_vars_) {
    throw GrammarError("grammar declares " + std::to_string(next_variable) + " object variables, expected " +
                       std::to_string(num_vars_));
  }
}

void ArcSemantics::apply(ProductionId id, std::span<const Value* const> args, Value& out) const {
  const Meaning& m = meanings_.at(id);
  const std::size_t n = num_contexts();
  if (m.kind == Kind::kChain) {
    out = *args[0];
    return;
  }
  if (m.kind == Kind::kStructural) {
    out.clear();
    return;
  }
  out.resize(n);
  switch (m.kind) {
    case Kind::kVariable:
      for (std::size_t k = 0; k < n; ++k) out[k] = ctx_vars_[k * num_vars_ + m.value];
      break;
    case Kind::kConst:
      std::fill(out.begin(), out.end(), m.value);
      break;
    case Kind::kMin:
    case Kind::kMax:
      for (std::size_t k = 0; k < n; ++k) {
        const Scene& s = scenes_[ctx_scene_[k]];
        const auto& table = m.kind == Kind::kMin ? s.min_attr : s.max_attr;
        out[k] = table[static_cast<std::size_t>(m.attr)];
      }
      break;
    case Kind::kAttrOf: {
      const Value& obj = *args[0];
      for (std::size_t k = 0; k < n; ++k) {
        out[k] = obj[k] == kUndef ? kUndef : scenes_[ctx_scene_[k]].objects[obj[k]].attr(m.attr);
      }
      break;
    }
    case Kind::kDirOf:
    case Kind::kAxisOf: {
      const Value& obj = *args[0];
      for (std::size_t k = 0; k < n; ++k) {
        out[k] = kUndef;
        if (obj[k] == kUndef) continue;
        const Scene& s = scenes_[ctx_scene_[k]];
        const SceneObject& a = s.objects[ctx_vars_[k * num_vars_]];
        const SceneObject& b = s.objects[obj[k]];
        // Doubled bounding-box centers keep the arithmetic integral.
        const int dr = (2 * b.row + b.height) - (2 * a.row + a.height);
        const int dc = (2 * b.column + b.width) - (2 * a.column + a.width);
        if (dr == 0 && dc == 0) continue;
        if (m.kind == Kind::kDirOf) {
          static constexpr Dir kByOffset[3][3] = {{Dir::kUpLeft, Dir::kUp, Dir::kUpRight},
                                                  {Dir::kLeft, Dir::kUp, Dir::kRight},
                                                  {Dir::kDownLeft, Dir::kDown, Dir::kDownRight}};
          out[k] = static_cast<std::int32_t>(kByOffset[sign(dr) + 1][sign(dc) + 1]);
        } else if (dr == 0) {
          out[k] = static_cast<std::int32_t>(Axis::kHorizontal);
        } else if (dc == 0) {
          out[k] = static_cast<std::int32_t>(Axis::kVertical);
        } else if (std::abs(dr) == std::abs(dc)) {
          out[k] = static_cast<std::int32_t>(sign(dr) == sign(dc) ? Axis::kLeftDiagonal : Axis::kRightDiagonal);
        }
      }
      break;
    }
    case Kind::kEq: {
      const Value& a = *args[0];
      const Value& b = *args[1];
      for (std::size_t k = 0; k < n; ++k) out[k] = a[k] != kUndef && a[k] == b[k];
      break;
    }
    case Kind::kNeighbor: {
      const Value& a = *args[0];
      const Value& b = *args[1];
      for (std::size_t k = 0; k < n; ++k) {
        out[k] = a[k] != kUndef && b[k] != kUndef && scenes_[ctx_scene_[k]].is_neighbor(a[k], b[k]);
      }
      break;
    }
    case Kind::kNot:
      for (std::size_t k = 0; k < n; ++k) out[k] = !(*args[0])[k];
      break;
    case Kind::kAnd:
      for (std::size_t k = 0; k < n; ++k) out[k] = (*args[0])[k] && (*args[1])[k];
      break;
    case Kind::kOr:
      for (std::size_t k = 0; k < n; ++k) out[k] = (*args[0])[k] || (*args[1])[k];
      break;
    case Kind::kTransform: {
      // Contexts mostly repeat the same argument tuple; reuse the last id.
      std::int32_t last_a = kUndef, last_b = kUndef, last_id = kUndef;
      bool have_last = false;
      for (std::size_t k = 0; k < n; ++k) {
        const std::int32_t a = args.size() > 0 ? (*args[0])[k] : 0;
        const std::int32_t b = args.size() > 1 ? (*args[1])[k] : 0;
        if (a == kUndef || b == kUndef) {
          out[k] = kUndef;
          continue;
        }
        if (!have_last || a != last_a || b != last_b) {
          last_id = intern_actions({Action{m.op, a, b}});
          last_a = a;
          last_b = b;
          have_last = true;
        }
        out[k] = last_id;
      }
      break;
    }
    case Kind::kSequence: {
      const Value& a = *args[0];
      const Value& b = *args[1];
      for (std::size_t k = 0; k < n; ++k) {
        if (a[k] == kUndef || b[k] == kUndef) {
          out[k] = kUndef;
          continue;
        }
        std::vector<Action> seq = action_seqs_[a[k]];
        const auto& tail = action_seqs_[b[k]];
        seq.insert(seq.end(), tail.begin(), tail.end());
        out[k] = intern_actions(std::move(seq));
      }
      break;
    }
    case Kind::kChain:
    case Kind::kStructural:
      break;
  }
}

std::size_t ArcSemantics::hash(const Value& v) const {
  std::size_t h = 1469598103934665603ull;
  for (std::int32_t x : v) h = (h ^ static_cast<std::uint32_t>(x)) * 1099511628211ull;
  return h;
}

std::int32_t ArcSemantics::intern_actions(std::vector<Action> seq) const {
  std::string key;
  for (const Action& a : seq) {
    append_bytes(key, static_cast<std::int32_t>(a.op));
    append_bytes(key, a.a);
    append_bytes(key, a.b);
  }
  auto [it, inserted] = action_index_.try_emplace(std::move(key), static_cast<std::int32_t>(action_seqs_.size()));
  if (inserted) action_seqs_.push_back(std::move(seq));
  return it->second;
}

std::int32_t ArcSemantics::effect(std::int32_t action_id, std::size_t p, std::size_t i) const {
  if (action_id == kUndef) return kUndef;
  const std::uint64_t cache_key = (static_cast<std::uint64_t>(action_id) << 32) | (p << 16) | i;
  if (auto it = effect_cache_.find(cache_key); it != effect_cache_.end()) return it->second;
  const Scene& s = scenes_.at(p);
  std::vector<Cell> cells = s.objects.at(i).cells;
  for (const Action& a : action_seqs_.at(action_id)) cells = apply_action(s, i, cells, a);
  std::string key;
  append_bytes(key, static_cast<std::int32_t>(p));
  append_bytes(key, static_cast<std::int32_t>(i));
  for (const Cell& c : cells) {
    append_bytes(key, c.row);
    append_bytes(key, c.col);
    key.push_back(static_cast<char>(c.color));
  }
  auto [it, inserted] = effect_index_.try_emplace(std::move(key), static_cast<std::int32_t>(effects_.size()));
  if (inserted) effects_.push_back({p, i, std::move(cells)});
  effect_cache_.emplace(cache_key, it->second);
  return it->second;
}

namespace {

std::optional<ProductionId> find_production(const Grammar& g, std::string_view lhs,
                                            std::initializer_list<std::string_view> rhs) {
  auto nt = g.find_nonterminal(lhs);
  if (!nt) return std::nullopt;
  for (ProductionId id : g.productions_of(*nt)) {
    const Production& p = g.production(id);
    if (p.rhs.size() != rhs.size()) continue;
    bool same = true;
    std::size_t k = 0;
    for (std::string_view want : rhs) {
      const Symbol s = p.rhs[k++];
      const std::string& have = s.is_terminal() ? g.terminal_text(s.id) : g.nonterminal_name(s.id);
      if (have != want) same = false;
    }
    if (same) return id;
  }
  return std::nullopt;
}

ProductionId require_production(const Grammar& g, std::string_view lhs,
                                std::initializer_list<std::string_view> rhs) {
  auto id = find_production(g, lhs, rhs);
  if (!id) throw GrammarError("ARC grammar lacks a " + std::string(lhs) + " production");
  return *id;
}

}  // namespace

Program assemble_rule_program(const Grammar& g, const std::vector<ArcRule>& rules) {
  if (rules.empty()) throw GrammarError("a rule program needs at least one rule");
  const ProductionId single = require_production(g, "$Program", {"$Rule"});
  const ProductionId cons = require_production(g, "$Program", {"$Rule", ";", "$Program"});
  const ProductionId rule = require_production(g, "$Rule", {"if", "$Filter", "then", "$Transforms"});
  const ProductionId wrap = require_production(g, "$Transforms", {"$Transform"});
  const SymbolId transform_nt = *g.find_nonterminal("$Transform");

  auto make_rule = [&](const ArcRule& r) {
    Program t = r.transforms;
    if (g.production(t.production()).lhs == transform_nt) t = Program(wrap, {t});
    return Program(rule, {r.filter, t});
  };
  Program out = Program(single, {make_rule(rules.back())});
  for (std::size_t k = rules.size() - 1; k-- > 0;) out = Program(cons, {make_rule(rules[k]), out});
  return out;
}

std::optional<Grid> eval_rule_program(const Grammar& g, const Program& program, const Grid& input,
                                      const ArcDslConfig& config) {
  const SymbolId program_nt = *g.find_nonterminal("$Program");
  const SymbolId rule_nt = *g.find_nonterminal("$Rule");
  std::vector<Program> rules;
  for (const Program* cur = &program;;) {
    const Production& p = g.production(cur->production());
    if (p.lhs == rule_nt) {
      rules.push_back(*cur);
      break;
    }
    if (p.lhs != program_nt) throw GrammarError("eval_rule_program expects a $Program or $Rule derivation");
    const Program& first = cur->child(0);
    if (g.production(first.production()).lhs == rule_nt) {
      rules.push_back(first);
    } else {
      throw GrammarError("unexpected $Program shape");
    }
    if (cur->children().size() == 1) break;
    cur = &cur->child(1);
  }

  Scene scene = abstract_scene(input, config.abstraction);
  for (const Program& r : rules) {
    ArcSemantics sem(g, {scene}, config.variables.size());
    const auto filter = evaluate(sem, r.child(0));
    const auto actions = evaluate(sem, r.child(1));
    std::vector<std::vector<Cell>> unchanged, changed;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      std::int32_t chosen = kUndef;
      bool selected = false;
      const std::size_t begin = sem.block_begin(0, i);
      for (std::size_t k = begin; k < begin + sem.block_size(0); ++k) {
        if (!filter[k]) continue;
        const std::int32_t e = sem.effect(actions[k], 0, i);
        if (e == kUndef) return std::nullopt;
        if (selected && e != chosen) return std::nullopt;
        chosen = e;
        selected = true;
      }
      if (selected) {
        changed.push_back(sem.effect_cells(chosen));
      } else {
        unchanged.push_back(scene.objects[i].cells);
      }
    }
    unchanged.insert(unchanged.end(), std::make_move_iterator(changed.begin()),
                     std::make_move_iterator(changed.end()));
    scene = make_scene(scene.height, scene.width, scene.background, std::move(unchanged));
  }
  return render(scene);
}

}  // namespace surrosynth::arc
