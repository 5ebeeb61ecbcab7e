#include "almsp/lf.hpp"

#include <cctype>

#include "almsp/error.hpp"

namespace almsp {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::size_t count_nodes(const LfNode& n, bool internal_only) {
  std::size_t c = (!internal_only || !n.is_leaf()) ? 1 : 0;
  for (const auto& ch : n.children) c += count_nodes(ch, internal_only);
  return c;
}

class Reader {
public:
  explicit Reader(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {}

  LfTree read_root() {
    if (tokens_.empty()) throw ParseError("empty logical form");
    if (tokens_[0] != "(") throw ParseError("logical form must start with '('");
    LfTree t{read_list()};
    if (pos_ != tokens_.size()) {
      throw ParseError("unbalanced parentheses: tokens after the root at position " +
                       std::to_string(pos_));
    }
    return t;
  }

private:
  // Precondition: tokens_[pos_] == "(".
  LfNode read_list() {
    ++pos_;
    if (pos_ >= tokens_.size()) throw ParseError("unbalanced parentheses: missing ')'");
    if (tokens_[pos_] == ")") {
      throw ParseError("unlabeled node '( )' at position " + std::to_string(pos_ - 1));
    }
    if (tokens_[pos_] == "(") {
      throw ParseError("node label expected after '(' at position " + std::to_string(pos_));
    }
    LfNode node{tokens_[pos_++], {}};
    while (true) {
      if (pos_ >= tokens_.size()) throw ParseError("unbalanced parentheses: missing ')'");
      const auto& tok = tokens_[pos_];
      if (tok == ")") {
        ++pos_;
        return node;
      }
      if (tok == "(") {
        node.children.push_back(read_list());
      } else {
        node.children.push_back(LfNode{tok, {}});
        ++pos_;
      }
    }
  }

  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

void render_into(const LfNode& n, bool root, std::string& out) {
  if (n.is_leaf() && !root) {
    out += n.label;
    return;
  }
  out += "( ";
  out += n.label;
  for (const auto& ch : n.children) {
    out += ' ';
    render_into(ch, false, out);
  }
  out += " )";
}

void atoms_into(const LfNode& n, std::vector<Atom>& out) {
  out.push_back(n.label);
  for (const auto& ch : n.children) atoms_into(ch, out);
}

void compounds_into(const LfNode& n, std::vector<Compound>& out) {
  if (n.is_leaf()) return;
  Compound c{n.label, {}};
  c.child_heads.reserve(n.children.size());
  for (const auto& ch : n.children) c.child_heads.push_back(ch.label);
  out.push_back(std::move(c));
  for (const auto& ch : n.children) compounds_into(ch, out);
}

} // namespace

std::size_t LfTree::node_count() const { return count_nodes(root, false); }
std::size_t LfTree::internal_count() const { return count_nodes(root, true); }

std::string Compound::str() const {
  std::string s = "( " + head;
  for (const auto& c : child_heads) {
    s += ' ';
    s += c;
  }
  s += " )";
  return s;
}

std::vector<std::string> tokenize_lf(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : text) {
    if (is_space(c)) {
      flush();
    } else if (c == '(' || c == ')') {
      flush();
      tokens.emplace_back(1, c);
    } else {
      cur += c;
    }
  }
  flush();
  return tokens;
}

LfTree parse_lf(std::string_view text) { return Reader(tokenize_lf(text)).read_root(); }

std::string render_lf(const LfTree& tree) {
  std::string out;
  render_into(tree.root, true, out);
  return out;
}

std::string normalize_lf(std::string_view text) {
  std::string out;
  for (const auto& tok : tokenize_lf(text)) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

std::vector<Atom> extract_atoms(const LfTree& tree) {
  std::vector<Atom> out;
  atoms_into(tree.root, out);
  return out;
}

std::vector<Compound> extract_compounds(const LfTree& tree) {
  std::vector<Compound> out;
  compounds_into(tree.root, out);
  return out;
}

} // namespace almsp
