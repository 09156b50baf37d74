#include "surrosynth/string_domain.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "surrosynth/grammar_io.hpp"
#include "surrosynth/sexpr.hpp"

namespace surrosynth::strings {

namespace {

struct OpName {
  std::string_view name;
  Op op;
};

constexpr OpName kOpNames[] = {
    {"str.++", Op::kConcat},        {"concat", Op::kConcat},
    {"str.replace", Op::kReplace},  {"replace", Op::kReplace},
    {"str.substr", Op::kSubstr},    {"substr", Op::kSubstr},
    {"ite", Op::kIte},              {"int.to.str", Op::kIntToStr},
    {"str.from_int", Op::kIntToStr}, {"str.from-int", Op::kIntToStr},
    {"str.at", Op::kAt},            {"at", Op::kAt},
    {"=", Op::kEq},                 {"str.contains", Op::kContains},
    {"contains", Op::kContains},    {"str.suffixof", Op::kSuffixOf},
    {"suffixof", Op::kSuffixOf},    {"str.prefixof", Op::kPrefixOf},
    {"prefixof", Op::kPrefixOf},    {"str.to.int", Op::kStrToInt},
    {"str.to_int", Op::kStrToInt},  {"str.to-int", Op::kStrToInt},
    {"+", Op::kAdd},                {"-", Op::kSub},
    {"str.len", Op::kLength},       {"length", Op::kLength},
    {"str.indexof", Op::kIndexOf},  {"indexof", Op::kIndexOf},
};

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::int64_t v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (text.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::string unquote(std::string_view quoted) {
  std::string out;
  for (std::size_t i = 1; i + 1 < quoted.size(); ++i) {
    out.push_back(quoted[i]);
    if (quoted[i] == '"' && i + 2 < quoted.size() && quoted[i + 1] == '"') ++i;
  }
  return out;
}

const std::string* as_string(const StrValue* v) { return std::get_if<std::string>(v); }
const std::int64_t* as_int(const StrValue* v) { return std::get_if<std::int64_t>(v); }
const bool* as_bool(const StrValue* v) { return std::get_if<bool>(v); }

StrValue substr(const std::string& s, std::int64_t i, std::int64_t n) {
  const auto len = static_cast<std::int64_t>(s.size());
  if (i < 0 || i >= len || n <= 0) return std::string();
  return s.substr(static_cast<std::size_t>(i), static_cast<std::size_t>(std::min(n, len - i)));
}

// ---------------------------------------------------------------------------
// Task loading

std::string nt_symbol(std::string_view name) { return "$" + std::string(name); }

StrValue literal_value(const SExpr& e) {
  if (e.is_string()) return e.text;
  if (e.is_atom("true")) return true;
  if (e.is_atom("false")) return false;
  if (e.is_atom()) {
    if (auto v = parse_int(e.text)) return *v;
  }
  if (e.is_list() && e.items.size() == 2 && e.items[0].is_atom("-") && e.items[1].is_atom()) {
    if (auto v = parse_int(e.items[1].text)) return -*v;
  }
  throw TaskLoadError("expected a literal value, got " + e.to_string() + " at offset " +
                      std::to_string(e.begin));
}

struct SynthFun {
  std::string name;
  std::vector<StringArg> args;
  Sort return_sort = Sort::kString;
  const SExpr* grammar = nullptr;  // list of (NT SORT (productions))
};

Sort parse_sort(const SExpr& e) {
  if (e.is_atom()) {
    if (auto s = sort_from_name(e.text)) return *s;
  }
  throw TaskLoadError("unknown sort " + e.to_string() + " at offset " + std::to_string(e.begin));
}

SynthFun parse_synth_fun(const SExpr& e) {
  if (e.items.size() < 4 || !e.items[1].is_atom() || !e.items[2].is_list()) {
    throw TaskLoadError("malformed synth-fun at offset " + std::to_string(e.begin));
  }
  SynthFun sf;
  sf.name = e.items[1].text;
  for (const SExpr& arg : e.items[2].items) {
    if (!arg.is_list() || arg.items.size() != 2 || !arg.items[0].is_atom()) {
      throw TaskLoadError("malformed argument at offset " + std::to_string(arg.begin));
    }
    sf.args.push_back({arg.items[0].text, parse_sort(arg.items[1])});
  }
  sf.return_sort = parse_sort(e.items[3]);
  // SyGuS 2 puts a list of predeclared nonterminals before the grammar.
  if (e.items.size() >= 6) {
    sf.grammar = &e.items[5];
  } else if (e.items.size() == 5) {
    sf.grammar = &e.items[4];
  }
  return sf;
}

struct GrammarParts {
  std::shared_ptr<const Grammar> grammar;
  std::vector<Sort> sorts;
};

GrammarParts instantiate_grammar(const SExpr& decls, const std::vector<StringArg>& args) {
  if (!decls.is_list() || decls.items.empty()) {
    throw TaskLoadError("synth-fun grammar must be a nonempty list");
  }
  std::map<std::string, Sort, std::less<>> nt_sorts;
  std::vector<const SExpr*> order;
  for (const SExpr& d : decls.items) {
    if (!d.is_list() || d.items.size() != 3 || !d.items[0].is_atom() || !d.items[2].is_list()) {
      throw TaskLoadError("malformed nonterminal declaration at offset " + std::to_string(d.begin));
    }
    if (!nt_sorts.emplace(d.items[0].text, parse_sort(d.items[1])).second) {
      throw TaskLoadError("duplicate nonterminal " + d.items[0].text);
    }
    order.push_back(&d);
  }
  std::set<std::string, std::less<>> arg_names;
  for (const auto& a : args) arg_names.insert(a.name);

  // A start symbol whose only rule is another nonterminal is collapsed into it.
  std::size_t first = 0;
  std::string start = order[0]->items[0].text;
  const auto& start_rules = order[0]->items[2].items;
  if (start_rules.size() == 1 && start_rules[0].is_atom() && nt_sorts.count(start_rules[0].text) &&
      start_rules[0].text != start) {
    bool referenced = false;
    for (std::size_t i = 1; i < order.size(); ++i) {
      for (const SExpr& r : order[i]->items[2].items) {
        if (r.is_atom(start)) referenced = true;
        for (const SExpr& x : r.items) referenced = referenced || x.is_atom(start);
      }
    }
    if (!referenced) {
      start = start_rules[0].text;
      first = 1;
    }
  }

  GrammarBuilder b(nt_symbol(start));
  for (std::size_t i = first; i < order.size(); ++i) b.declare(nt_symbol(order[i]->items[0].text));
  for (std::size_t i = first; i < order.size(); ++i) {
    const std::string lhs = nt_symbol(order[i]->items[0].text);
    std::set<std::vector<std::string>> seen;
    for (const SExpr& r : order[i]->items[2].items) {
      std::vector<std::string> rhs;
      std::optional<std::string> op;
      if (r.is_string()) {
        rhs.push_back(GrammarBuilder::escape_terminal(quote_string(r.text)));
      } else if (r.is_atom()) {
        if (nt_sorts.count(r.text)) {
          rhs.push_back(nt_symbol(r.text));
        } else if (arg_names.count(r.text) || r.text == "true" || r.text == "false" ||
                   parse_int(r.text)) {
          rhs.push_back(GrammarBuilder::escape_terminal(r.text));
        } else {
          throw TaskLoadError("unknown symbol '" + r.text + "' in grammar at offset " +
                              std::to_string(r.begin));
        }
      } else if (r.is_list() && !r.items.empty() && r.items[0].is_atom()) {
        if (!op_from_name(r.items[0].text)) {
          throw TaskLoadError("unknown operator '" + r.items[0].text + "' at offset " +
                              std::to_string(r.begin));
        }
        rhs.push_back("(");
        rhs.push_back(r.items[0].text);
        op = r.items[0].text;
        for (std::size_t k = 1; k < r.items.size(); ++k) {
          const SExpr& x = r.items[k];
          if (!x.is_atom() || !nt_sorts.count(x.text)) {
            throw TaskLoadError("operator arguments must be nonterminals, got " + x.to_string() +
                                " at offset " + std::to_string(x.begin));
          }
          rhs.push_back(nt_symbol(x.text));
        }
        rhs.push_back(")");
      } else {
        throw TaskLoadError("malformed production at offset " + std::to_string(r.begin));
      }
      if (seen.insert(rhs).second) b.add(lhs, rhs, op);
    }
  }
  GrammarParts parts;
  try {
    parts.grammar = std::make_shared<const Grammar>(b.build());
  } catch (const GrammarError& e) {
    throw TaskLoadError(std::string("invalid task grammar: ") + e.what());
  }
  for (SymbolId nt = 0; nt < parts.grammar->num_nonterminals(); ++nt) {
    parts.sorts.push_back(nt_sorts.find(parts.grammar->nonterminal_name(nt).substr(1))->second);
  }
  return parts;
}

void check_examples(const StringTask& task) {
  if (task.examples.empty()) throw TaskLoadError("task '" + task.name + "' has no examples");
  for (const auto& ex : task.examples) {
    if (ex.inputs.size() != task.args.size()) {
      throw TaskLoadError("example arity does not match the argument list");
    }
  }
}

std::string leading_comments(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line, out;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] != ';') break;
    auto end = line.find_last_not_of(" \t\r");
    if (!out.empty()) out.push_back('\n');
    out += line.substr(start, end - start + 1);
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view sort_name(Sort sort) {
  switch (sort) {
    case Sort::kString: return "String";
    case Sort::kInt: return "Int";
    case Sort::kBool: return "Bool";
  }
  return "?";
}

std::optional<Sort> sort_from_name(std::string_view name) {
  if (name == "String") return Sort::kString;
  if (name == "Int") return Sort::kInt;
  if (name == "Bool") return Sort::kBool;
  return std::nullopt;
}

bool is_undefined(const StrValue& v) { return std::holds_alternative<Undefined>(v); }

std::string display(const StrValue& v) {
  if (auto s = std::get_if<std::string>(&v)) return *s;
  if (auto i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (auto b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  return "<undefined>";
}

std::size_t hash_value(const StrValue& v) {
  std::size_t h = v.index() * 0x9e3779b97f4a7c15ULL;
  if (auto s = std::get_if<std::string>(&v)) return h ^ std::hash<std::string>{}(*s);
  if (auto i = std::get_if<std::int64_t>(&v)) return h ^ std::hash<std::int64_t>{}(*i);
  if (auto b = std::get_if<bool>(&v)) return h ^ static_cast<std::size_t>(*b);
  return h;
}

std::optional<Op> op_from_name(std::string_view name) {
  for (const auto& entry : kOpNames) {
    if (entry.name == name) return entry.op;
  }
  return std::nullopt;
}

std::size_t op_arity(Op op) {
  switch (op) {
    case Op::kVariable:
    case Op::kLiteral: return 0;
    case Op::kChain:
    case Op::kIntToStr:
    case Op::kStrToInt:
    case Op::kLength: return 1;
    case Op::kConcat:
    case Op::kAt:
    case Op::kEq:
    case Op::kContains:
    case Op::kSuffixOf:
    case Op::kPrefixOf:
    case Op::kAdd:
    case Op::kSub: return 2;
    case Op::kReplace:
    case Op::kSubstr:
    case Op::kIte:
    case Op::kIndexOf: return 3;
  }
  return 0;
}

StrValue apply_op(Op op, std::span<const StrValue* const> a) {
  if (a.size() != op_arity(op)) return Undefined{};
  if (op == Op::kIte) {
    const bool* c = as_bool(a[0]);
    if (!c) return Undefined{};
    return *c ? *a[1] : *a[2];
  }
  for (const StrValue* v : a) {
    if (is_undefined(*v)) return Undefined{};
  }
  switch (op) {
    case Op::kChain: return *a[0];
    case Op::kConcat: {
      auto x = as_string(a[0]);
      auto y = as_string(a[1]);
      if (!x || !y) return Undefined{};
      return *x + *y;
    }
    case Op::kReplace: {
      auto s = as_string(a[0]);
      auto t = as_string(a[1]);
      auto u = as_string(a[2]);
      if (!s || !t || !u) return Undefined{};
      if (t->empty()) return *u + *s;
      const auto pos = s->find(*t);
      if (pos == std::string::npos) return *s;
      std::string out = *s;
      out.replace(pos, t->size(), *u);
      return out;
    }
    case Op::kSubstr: {
      auto s = as_string(a[0]);
      auto i = as_int(a[1]);
      auto n = as_int(a[2]);
      if (!s || !i || !n) return Undefined{};
      return substr(*s, *i, *n);
    }
    case Op::kIntToStr: {
      auto n = as_int(a[0]);
      if (!n) return Undefined{};
      return *n < 0 ? std::string() : std::to_string(*n);
    }
    case Op::kAt: {
      auto s = as_string(a[0]);
      auto i = as_int(a[1]);
      if (!s || !i) return Undefined{};
      return substr(*s, *i, 1);
    }
    case Op::kEq: {
      if (a[0]->index() != a[1]->index()) return Undefined{};
      return *a[0] == *a[1];
    }
    case Op::kContains: {
      auto x = as_string(a[0]);
      auto y = as_string(a[1]);
      if (!x || !y) return Undefined{};
      return x->find(*y) != std::string::npos;
    }
    case Op::kSuffixOf: {
      auto x = as_string(a[0]);
      auto y = as_string(a[1]);
      if (!x || !y) return Undefined{};
      return y->size() >= x->size() && y->compare(y->size() - x->size(), x->size(), *x) == 0;
    }
    case Op::kPrefixOf: {
      auto x = as_string(a[0]);
      auto y = as_string(a[1]);
      if (!x || !y) return Undefined{};
      return y->compare(0, x->size(), *x) == 0 && y->size() >= x->size();
    }
    case Op::kStrToInt: {
      auto s = as_string(a[0]);
      if (!s) return Undefined{};
      if (s->empty()) return std::int64_t{-1};
      std::int64_t v = 0;
      for (char c : *s) {
        if (c < '0' || c > '9') return std::int64_t{-1};
        if (__builtin_mul_overflow(v, 10, &v) || __builtin_add_overflow(v, c - '0', &v)) {
          return Undefined{};
        }
      }
      return v;
    }
    case Op::kAdd:
    case Op::kSub: {
      auto x = as_int(a[0]);
      auto y = as_int(a[1]);
      if (!x || !y) return Undefined{};
      std::int64_t r = 0;
      const bool overflow = op == Op::kAdd ? __builtin_add_overflow(*x, *y, &r)
                                           : __builtin_sub_overflow(*x, *y, &r);
      if (overflow) return Undefined{};
      return r;
    }
    case Op::kLength: {
      auto s = as_string(a[0]);
      if (!s) return Undefined{};
      return static_cast<std::int64_t>(s->size());
    }
    case Op::kIndexOf: {
      auto s = as_string(a[0]);
      auto t = as_string(a[1]);
      auto i = as_int(a[2]);
      if (!s || !t || !i) return Undefined{};
      const auto len = static_cast<std::int64_t>(s->size());
      if (*i < 0 || *i > len) return std::int64_t{-1};
      const auto pos = s->find(*t, static_cast<std::size_t>(*i));
      return pos == std::string::npos ? std::int64_t{-1} : static_cast<std::int64_t>(pos);
    }
    default: return Undefined{};
  }
}

StringTask load_sygus_task(std::string_view text, std::string name) {
  std::vector<SExpr> commands;
  try {
    commands = parse_sexprs(text);
  } catch (const SExprError& e) {
    throw TaskLoadError(std::string("malformed task: ") + e.what());
  }
  StringTask task;
  task.name = std::move(name);
  task.hint = leading_comments(text);
  std::optional<SynthFun> sf;
  for (const SExpr& c : commands) {
    if (c.head() == "synth-fun") {
      if (sf) throw TaskLoadError("more than one synth-fun");
      sf = parse_synth_fun(c);
    }
  }
  if (!sf) throw TaskLoadError("task has no synth-fun");
  task.function_name = sf->name;
  task.args = sf->args;
  task.return_sort = sf->return_sort;

  for (const SExpr& c : commands) {
    if (c.head() != "constraint") continue;
    if (c.items.size() != 2 || c.items[1].head() != "=" || c.items[1].items.size() != 3) {
      throw TaskLoadError("unsupported constraint at offset " + std::to_string(c.begin));
    }
    const SExpr* call = &c.items[1].items[1];
    const SExpr* out = &c.items[1].items[2];
    if (call->head() != sf->name) std::swap(call, out);
    if (call->head() != sf->name) {
      throw TaskLoadError("constraint does not apply " + sf->name + " at offset " +
                          std::to_string(c.begin));
    }
    StringExample ex;
    for (std::size_t i = 1; i < call->items.size(); ++i) ex.inputs.push_back(literal_value(call->items[i]));
    ex.output = literal_value(*out);
    task.examples.push_back(std::move(ex));
  }
  check_examples(task);

  std::string union_text;
  const SExpr* decls = sf->grammar;
  std::vector<SExpr> parsed_union;
  if (!decls) {
    std::vector<std::string> strs{"", " "};
    union_text = union_synth_fun(sf->name, sf->args, sf->return_sort, strs, {0, 1});
    parsed_union = parse_sexprs(union_text);
    decls = &parsed_union[0].items[4];
  }
  GrammarParts parts = instantiate_grammar(*decls, task.args);
  task.grammar = parts.grammar;
  task.nonterminal_sorts = parts.sorts;
  return task;
}

std::string union_synth_fun(const std::string& function_name, const std::vector<StringArg>& args,
                            Sort return_sort, const std::vector<std::string>& string_literals,
                            const std::vector<std::int64_t>& int_literals) {
  std::ostringstream s;
  s << "(synth-fun " << function_name << " (";
  for (std::size_t i = 0; i < args.size(); ++i) {
    s << (i ? " " : "") << "(" << args[i].name << " " << sort_name(args[i].sort) << ")";
  }
  s << ") " << sort_name(return_sort) << " ((Start " << sort_name(return_sort) << " ("
    << (return_sort == Sort::kString ? "ntString" : return_sort == Sort::kInt ? "ntInt" : "ntBool")
    << ")) (ntString String (";
  for (const auto& a : args) {
    if (a.sort == Sort::kString) s << a.name << " ";
  }
  for (const auto& lit : string_literals) s << quote_string(lit) << " ";
  s << "(str.replace ntString ntString ntString) (str.++ ntString ntString) "
       "(str.substr ntString ntInt ntInt) (ite ntBool ntString ntString) (int.to.str ntInt) "
       "(str.at ntString ntInt))) (ntInt Int (";
  for (const auto& a : args) {
    if (a.sort == Sort::kInt) s << a.name << " ";
  }
  for (std::int64_t lit : int_literals) s << lit << " ";
  s << "(str.to.int ntString) (+ ntInt ntInt) (- ntInt ntInt) (str.len ntString) "
       "(ite ntBool ntInt ntInt) (str.indexof ntString ntString ntInt))) (ntBool Bool (true false "
       "(= ntInt ntInt) (str.contains ntString ntString) (str.suffixof ntString ntString) "
       "(str.prefixof ntString ntString)))))";
  return s.str();
}

StringTask load_json_task(std::string_view text, std::string name) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw TaskLoadError(std::string("malformed task JSON: ") + e.what());
  }
  auto to_value = [](const json& v) -> StrValue {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer()) return v.get<std::int64_t>();
    throw TaskLoadError("unsupported example value " + v.dump());
  };
  try {
    StringTask task;
    task.name = j.value("name", name);
    if (task.name.empty()) task.name = name;
    task.function_name = j.value("function", std::string("f"));
    task.hint = j.value("hint", std::string());
    for (const auto& a : j.at("args")) {
      auto sort = sort_from_name(a.value("sort", std::string("String")));
      if (!sort) throw TaskLoadError("unknown argument sort");
      task.args.push_back({a.at("name").get<std::string>(), *sort});
    }
    auto ret = sort_from_name(j.value("return", std::string("String")));
    if (!ret) throw TaskLoadError("unknown return sort");
    task.return_sort = *ret;
    for (const auto& e : j.at("examples")) {
      StringExample ex;
      for (const auto& v : e.at("inputs")) ex.inputs.push_back(to_value(v));
      ex.output = to_value(e.at("output"));
      task.examples.push_back(std::move(ex));
    }
    check_examples(task);
    std::vector<std::string> strs;
    std::vector<std::int64_t> ints;
    if (j.contains("literals")) {
      const auto& lits = j.at("literals");
      if (lits.contains("String")) strs = lits.at("String").get<std::vector<std::string>>();
      if (lits.contains("Int")) ints = lits.at("Int").get<std::vector<std::int64_t>>();
    }
    const std::string sf = union_synth_fun(task.function_name, task.args, task.return_sort, strs, ints);
    auto parsed = parse_sexprs(sf);
    GrammarParts parts = instantiate_grammar(parsed[0].items[4], task.args);
    task.grammar = parts.grammar;
    task.nonterminal_sorts = parts.sorts;
    return task;
  } catch (const json::exception& e) {
    throw TaskLoadError(std::string("malformed task JSON: ") + e.what());
  }
}

StringTask load_string_task(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const std::string stem = path.stem().string();
  if (path.extension() == ".json") return load_json_task(text, stem);
  return load_sygus_task(text, stem);
}

std::string synth_fun_text(const StringTask& task) {
  const Grammar& g = *task.grammar;
  std::ostringstream s;
  s << "(synth-fun " << task.function_name << " (";
  for (std::size_t i = 0; i < task.args.size(); ++i) {
    s << (i ? " " : "") << "(" << task.args[i].name << " " << sort_name(task.args[i].sort) << ")";
  }
  s << ") " << sort_name(task.return_sort) << " (";
  s << "(Start " << sort_name(task.return_sort) << " (" << g.nonterminal_name(g.start()).substr(1) << "))";
  for (SymbolId nt = 0; nt < g.num_nonterminals(); ++nt) {
    s << " (" << g.nonterminal_name(nt).substr(1) << " " << sort_name(task.nonterminal_sorts[nt]) << " (";
    bool first = true;
    for (ProductionId id : g.productions_of(nt)) {
      const Production& p = g.production(id);
      if (!first) s << " ";
      first = false;
      std::vector<std::string> parts;
      for (const Symbol& sym : p.rhs) {
        parts.push_back(sym.is_terminal() ? g.terminal_text(sym.id) : g.nonterminal_name(sym.id).substr(1));
      }
      if (parts.size() >= 2 && parts.front() == "(") {
        s << "(";
        for (std::size_t i = 1; i + 1 < parts.size(); ++i) s << (i > 1 ? " " : "") << parts[i];
        s << ")";
      } else {
        for (std::size_t i = 0; i < parts.size(); ++i) s << (i ? " " : "") << parts[i];
      }
    }
    s << "))";
  }
  s << "))";
  return s.str();
}

std::string extract_body(std::string_view completion) {
  std::string_view text = completion;
  std::string fenced;
  for (std::size_t pos = 0;;) {
    const auto open = completion.find("```", pos);
    if (open == std::string_view::npos) break;
    auto line_end = completion.find('\n', open);
    if (line_end == std::string_view::npos) break;
    const auto close = completion.find("```", line_end);
    if (close == std::string_view::npos) break;
    auto block = completion.substr(line_end + 1, close - line_end - 1);
    if (block.size() > fenced.size()) fenced = std::string(block);
    pos = close + 3;
  }
  if (!fenced.empty()) text = fenced;

  try {
    const auto def = text.find("(define-fun");
    if (def != std::string_view::npos) {
      std::size_t pos = def + std::string_view("(define-fun").size();
      for (int i = 0; i < 3; ++i) pos = parse_first_sexpr(text, pos).end;
      const SExpr body = parse_first_sexpr(text, pos);
      return std::string(text.substr(body.begin, body.end - body.begin));
    }
    const SExpr body = parse_first_sexpr(text, 0);
    return std::string(text.substr(body.begin, body.end - body.begin));
  } catch (const SExprError&) {
    return trim(text);
  }
}

StringSemantics::StringSemantics(const StringTask& task) : sorts_(task.nonterminal_sorts) {
  for (const auto& ex : task.examples) {
    inputs_.push_back(ex.inputs);
    goal_.push_back(ex.output);
  }
  const Grammar& g = *task.grammar;
  for (const Production& p : g.productions()) {
    Meaning m;
    if (p.rhs.size() == 1 && p.rhs[0].is_nonterminal()) {
      m.op = Op::kChain;
    } else if (p.rhs.size() == 1) {
      const std::string& t = g.terminal_text(p.rhs[0].id);
      auto arg = std::find_if(task.args.begin(), task.args.end(),
                              [&](const StringArg& a) { return a.name == t; });
      if (arg != task.args.end()) {
        m.op = Op::kVariable;
        m.variable = static_cast<std::size_t>(arg - task.args.begin());
      } else if (!t.empty() && t.front() == '"') {
        m.literal = unquote(t);
      } else if (t == "true" || t == "false") {
        m.literal = t == "true";
      } else if (auto v = parse_int(t)) {
        m.literal = *v;
      } else {
        throw TaskLoadError("cannot interpret terminal '" + t + "'");
      }
    } else if (p.rhs.size() >= 3 && p.rhs[1].is_terminal()) {
      auto op = op_from_name(g.terminal_text(p.rhs[1].id));
      if (!op || op_arity(*op) != p.arity()) {
        throw TaskLoadError("cannot interpret production " + g.describe(p.id));
      }
      m.op = *op;
    } else {
      throw TaskLoadError("cannot interpret production " + g.describe(p.id));
    }
    meanings_.push_back(std::move(m));
  }
}

void StringSemantics::apply(ProductionId id, std::span<const Value* const> args, Value& out) const {
  const Meaning& m = meanings_.at(id);
  const std::size_t n = inputs_.size();
  out.resize(n);
  switch (m.op) {
    case Op::kVariable:
      for (std::size_t i = 0; i < n; ++i) out[i] = inputs_[i][m.variable];
      return;
    case Op::kLiteral:
      std::fill(out.begin(), out.end(), m.literal);
      return;
    case Op::kChain:
      out = *args[0];
      return;
    default: break;
  }
  const StrValue* ptrs[3] = {nullptr, nullptr, nullptr};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < args.size(); ++k) ptrs[k] = &(*args[k])[i];
    out[i] = apply_op(m.op, std::span<const StrValue* const>(ptrs, args.size()));
  }
}

std::size_t StringSemantics::hash(const Value& v) const {
  std::size_t h = v.size();
  for (const auto& x : v) h = h * 1000003u ^ hash_value(x);
  return h;
}

StrValue StringSemantics::eval(const Program& p, const std::vector<StrValue>& inputs) const {
  const Meaning& m = meanings_.at(p.production());
  switch (m.op) {
    case Op::kVariable: return inputs.at(m.variable);
    case Op::kLiteral: return m.literal;
    default: break;
  }
  std::vector<StrValue> kids;
  for (const Program& c : p.children()) kids.push_back(eval(c, inputs));
  if (m.op == Op::kChain) return kids.at(0);
  std::vector<const StrValue*> ptrs;
  for (const auto& k : kids) ptrs.push_back(&k);
  return apply_op(m.op, ptrs);
}

StrValue StringSemantics::eval(const Program& p, std::size_t example) const {
  return eval(p, inputs_.at(example));
}

}  // namespace surrosynth::strings
