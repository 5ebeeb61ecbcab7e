#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace almsp {

struct LfNode {
  std::string label;
  std::vector<LfNode> children;

  bool is_leaf() const { return children.empty(); }
  friend bool operator==(const LfNode&, const LfNode&) = default;
};

/// A logical form as a labeled tree. Labels never contain whitespace or
/// parentheses.
struct LfTree {
  LfNode root;

  std::size_t node_count() const;
  std::size_t internal_count() const;
  friend bool operator==(const LfTree&, const LfTree&) = default;
};

using Atom = std::string;

/// A node together with the head labels of its immediate children.
struct Compound {
  std::string head;
  std::vector<std::string> child_heads;

  /// "( head c1 ... cN )"
  std::string str() const;
  friend bool operator==(const Compound&, const Compound&) = default;
};

/// Split on ASCII whitespace; '(' and ')' are always tokens of their own.
std::vector<std::string> tokenize_lf(std::string_view text);

/// Throws ParseError on empty input, unbalanced parentheses, "( )",
/// or trailing tokens after the root.
LfTree parse_lf(std::string_view text);

std::string render_lf(const LfTree& tree);

/// Whitespace-normalized token form; equal LFs compare equal under it.
std::string normalize_lf(std::string_view text);

/// One atom per node occurrence, pre-order.
std::vector<Atom> extract_atoms(const LfTree& tree);

/// One compound per internal node, pre-order.
std::vector<Compound> extract_compounds(const LfTree& tree);

} // namespace almsp
