#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seqpred {

using Symbol = std::uint8_t;

// Ordered finite symbol set. Symbol values are indices into the label list;
// index order is significant (ties in min-probability searches break toward
// the smallest index). Capped at 8 symbols: everything in this library works
// on alphabets of size two or three, and the cap keeps per-step distributions
// in fixed-size storage.
class Alphabet {
 public:
  static constexpr std::size_t kMaxSymbols = 8;

  explicit Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) throw std::invalid_argument("alphabet needs at least 2 symbols");
    if (labels_.size() > kMaxSymbols) throw std::invalid_argument("alphabet larger than supported cap of 8 symbols");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i].empty()) throw std::invalid_argument("empty symbol label");
      for (std::size_t j = 0; j < i; ++j)
        if (labels_[i] == labels_[j]) throw std::invalid_argument("duplicate symbol label: " + labels_[i]);
    }
  }

  static Alphabet binary() { return Alphabet({"0", "1"}); }

  // Binary payload plus a reset marker 'a' at index 0.
  static Alphabet marked_binary() { return Alphabet({"a", "0", "1"}); }

  static Alphabet indexed(std::size_t k) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < k; ++i) labels.push_back(std::to_string(i));
    return Alphabet(std::move(labels));
  }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(Symbol s) const { return labels_.at(s); }

  std::optional<Symbol> index_of(std::string_view lab) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == lab) return static_cast<Symbol>(i);
    return std::nullopt;
  }

  bool operator==(const Alphabet& o) const { return labels_ == o.labels_; }
  bool operator!=(const Alphabet& o) const { return !(*this == o); }

  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
};

// A finite prefix x_1..x_n of a one-way infinite sequence. Positions are
// 1-based in the math; operator[] is 0-based as usual.
class History {
 public:
  explicit History(Alphabet a) : alphabet_(std::move(a)) {}
  History(Alphabet a, std::vector<Symbol> syms) : alphabet_(std::move(a)), syms_(std::move(syms)) {
    for (Symbol s : syms_)
      if (s >= alphabet_.size()) throw std::invalid_argument("history symbol out of alphabet range");
  }

  // Parses a string of single-character symbol labels, e.g. "0101" or "a01".
  static History parse(const Alphabet& a, std::string_view text) {
    std::vector<Symbol> syms;
    syms.reserve(text.size());
    for (char c : text) {
      auto idx = a.index_of(std::string_view(&c, 1));
      if (!idx) throw std::invalid_argument(std::string("symbol not in alphabet: ") + c);
      syms.push_back(*idx);
    }
    return History(a, std::move(syms));
  }

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t size() const { return syms_.size(); }
  bool empty() const { return syms_.empty(); }
  Symbol operator[](std::size_t i) const { return syms_[i]; }
  const std::vector<Symbol>& symbols() const { return syms_; }

  void push_back(Symbol s) {
    if (s >= alphabet_.size()) throw std::invalid_argument("history symbol out of alphabet range");
    syms_.push_back(s);
  }

  History prefix(std::size_t m) const {
    if (m > syms_.size()) throw std::invalid_argument("prefix longer than history");
    return History(alphabet_, std::vector<Symbol>(syms_.begin(), syms_.begin() + m));
  }

  std::string to_string() const {
    std::string out;
    for (Symbol s : syms_) out += alphabet_.label(s);
    return out;
  }

  bool operator==(const History& o) const { return alphabet_ == o.alphabet_ && syms_ == o.syms_; }

 private:
  Alphabet alphabet_;
  std::vector<Symbol> syms_;
};

}  // namespace seqpred
