#include "ethlab/cli/selector.hpp"

#include <cctype>
#include <charconv>
#include <optional>

namespace ethlab::cli {

namespace {

class Parser {
 public:
  Parser(std::string_view text, int L, int dim, const OperatorMatrix* h) : text_(text), L_(L), dim_(dim), h_(h) {}

  OperatorMatrix parse() {
    skip();
    if (pos_ == text_.size()) fail("empty expression");
    OperatorMatrix total = term();
    while (accept('+')) total += term();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return total;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw SelectorError("operator '" + std::string(text_) + "': " + why + " at position " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      skip();
      return true;
    }
    return false;
  }

  std::optional<double> number() {
    skip();
    if (pos_ >= text_.size()) return std::nullopt;
    const char c = text_[pos_];
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.')) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc()) fail("bad number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  std::string name() {
    skip();
    const auto start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an operator name");
    return std::string(text_.substr(start, pos_ - start));
  }

  OperatorMatrix term() {
    std::optional<double> coefficient = number();
    if (coefficient && !accept('*')) fail("expected '*' after a coefficient");
    OperatorMatrix product = factor();
    while (accept('*')) product = product * factor();
    if (coefficient) product = Complex(*coefficient, 0.0) * product;
    return product;
  }

  LocalOperator local_operator(const std::string& n) const {
    if (dim_ == 2) {
      if (n == "sx") return local::sigma_x();
      if (n == "sy") return local::sigma_y();
      if (n == "sz") return local::sigma_z();
    } else {
      if (n == "q") return local::charge();
      if (n.size() == 7 && n.starts_with("lambda") && n[6] >= '1' && n[6] <= '8') return local::gell_mann(n[6] - '0');
    }
    throw SelectorError("operator '" + std::string(text_) + "': unknown name '" + n + "' for site dimension " +
                        std::to_string(dim_));
  }

  OperatorMatrix factor() {
    const std::string n = name();
    if (n == "Q") {
      if (dim_ != 3) fail("Q needs a qutrit chain");
      return build_charge_operators(L_).total;
    }
    if (n == "H") {
      if (h_ == nullptr) fail("H is not available here");
      return *h_;
    }
    if (n == "I") return identity_operator(lattice_dim(L_, dim_));
    const LocalOperator op = local_operator(n);
    if (!accept('(')) fail("expected '(' after " + n);
    skip();
    OperatorMatrix out;
    if (text_.substr(pos_).starts_with("all")) {
      pos_ += 3;
      std::vector<SiteFactor> factors;
      for (int r = 1; r <= L_; ++r) factors.push_back({r, op});
      out = embed_product(factors, L_, dim_);
    } else {
      int site = 0;
      const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), site);
      if (ec != std::errc()) fail("expected a site index");
      pos_ = static_cast<std::size_t>(ptr - text_.data());
      if (site < 1 || site > L_) fail("site " + std::to_string(site) + " outside 1.." + std::to_string(L_));
      out = embed_at_site(op, site, L_, dim_);
    }
    if (!accept(')')) fail("expected ')'");
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int L_;
  int dim_;
  const OperatorMatrix* h_;
};

}  // namespace

OperatorMatrix operator_selector(std::string_view expr, int L, int dim, const OperatorMatrix* hamiltonian) {
  if (dim != 2 && dim != 3) throw SelectorError("site dimension must be 2 or 3");
  if (L < 1) throw SelectorError("chain length must be positive");
  return Parser(expr, L, dim, hamiltonian).parse();
}

std::string selector_label(std::string_view expr) {
  std::string out;
  for (char c : expr) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

}  // namespace ethlab::cli
