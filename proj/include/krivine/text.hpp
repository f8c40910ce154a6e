#pragma once

// Text syntax for terms, stacks and processes.
//
//   term    := '\' ident+ '.' term | atom+
//   atom    := ident | '(' term ')' | 'k[' stack ']' | '#' nat
//   stack   := term '.' stack | ident
//   process := term '*' stack

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "krivine/syntax.hpp"

namespace krivine {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct ParseOptions {
  /// Which instruction constants may appear.  Defaults to all but fork.
  std::function<bool(ConstId)> allow_instruction;
  /// Unbound identifiers become free variables instead of errors.
  bool allow_free_vars = false;
};

Term parse_term(std::string_view text, const ParseOptions& options = {});
Stack parse_stack(std::string_view text, const ParseOptions& options = {});
Process parse_process(std::string_view text, const ParseOptions& options = {});

std::string to_string(const Term& t);
std::string to_string(const Stack& s);
std::string to_string(const Process& p);

}  // namespace krivine
