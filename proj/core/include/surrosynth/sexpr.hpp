#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace surrosynth {

class SExprError : public std::runtime_error {
 public:
  SExprError(const std::string& message, std::size_t offset)
      : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct SExpr {
  enum class Kind { kAtom, kString, kList };

  Kind kind = Kind::kAtom;
  std::string text;  // atom text, or the unquoted string contents
  std::vector<SExpr> items;
  std::size_t begin = 0;  // source span
  std::size_t end = 0;

  bool is_atom() const { return kind == Kind::kAtom; }
  bool is_string() const { return kind == Kind::kString; }
  bool is_list() const { return kind == Kind::kList; }
  bool is_atom(std::string_view s) const { return is_atom() && text == s; }
  /// Head atom of a nonempty list, or "".
  std::string_view head() const;
  std::string to_string() const;
};

/// `;` comments run to end of line. Strings use "" to escape a quote.
std::vector<SExpr> parse_sexprs(std::string_view text);
/// First complete expression starting at or after `pos`; throws if none.
SExpr parse_first_sexpr(std::string_view text, std::size_t pos = 0);

std::string quote_string(std::string_view contents);

}  // namespace surrosynth
