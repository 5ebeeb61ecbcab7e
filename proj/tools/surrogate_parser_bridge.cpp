// Serves the built-in surrogate parser over the adapter wire protocol on
// stdin/stdout. Used to exercise the external-parser adapter.
#include <iostream>

#include "almsp/parser.hpp"

int main() {
  std::ios::sync_with_stdio(false);
  almsp::serve_surrogate_protocol(std::cin, std::cout);
  return 0;
}
