#include "surrosynth/sexpr.hpp"

#include <cctype>

namespace surrosynth {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool done() {
    skip();
    return pos_ >= text_.size();
  }

  std::size_t pos() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }

  SExpr read() {
    skip();
    if (pos_ >= text_.size()) throw SExprError("unexpected end of input", pos_);
    SExpr e;
    e.begin = pos_;
    const char c = text_[pos_];
    if (c == '(') {
      e.kind = SExpr::Kind::kList;
      ++pos_;
      while (true) {
        skip();
        if (pos_ >= text_.size()) throw SExprError("unclosed '('", e.begin);
        if (text_[pos_] == ')') {
          ++pos_;
          break;
        }
        e.items.push_back(read());
      }
    } else if (c == ')') {
      throw SExprError("unexpected ')'", pos_);
    } else if (c == '"') {
      e.kind = SExpr::Kind::kString;
      ++pos_;
      while (true) {
        if (pos_ >= text_.size()) throw SExprError("unterminated string", e.begin);
        if (text_[pos_] == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            e.text.push_back('"');
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        e.text.push_back(text_[pos_++]);
      }
    } else {
      e.kind = SExpr::Kind::kAtom;
      while (pos_ < text_.size()) {
        const char d = text_[pos_];
        if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == '"' || d == ';') break;
        e.text.push_back(d);
        ++pos_;
      }
    }
    e.end = pos_;
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view SExpr::head() const {
  if (!is_list() || items.empty() || !items[0].is_atom()) return {};
  return items[0].text;
}

std::string SExpr::to_string() const {
  switch (kind) {
    case Kind::kAtom: return text;
    case Kind::kString: return quote_string(text);
    case Kind::kList: {
      std::string out = "(";
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.push_back(' ');
        out += items[i].to_string();
      }
      return out + ")";
    }
  }
  return {};
}

std::vector<SExpr> parse_sexprs(std::string_view text) {
  Reader r(text);
  std::vector<SExpr> out;
  while (!r.done()) out.push_back(r.read());
  return out;
}

SExpr parse_first_sexpr(std::string_view text, std::size_t pos) {
  Reader r(text);
  r.seek(pos);
  return r.read();
}

std::string quote_string(std::string_view contents) {
  std::string out = "\"";
  for (char c : contents) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace surrosynth
