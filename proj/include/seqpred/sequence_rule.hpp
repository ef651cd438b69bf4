#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace seqpred {

// Finitely described infinite binary sequence t_1 t_2 ...; the target
// sequences that the bias/hidden-chain measures and the deterministic
// measures are built from. Positions are 1-based.
class SequenceRule {
 public:
  // 0101... for pattern "01"; pattern "1" is the all-ones sequence.
  static SequenceRule periodic(const std::string& pattern01) {
    SequenceRule r;
    r.kind_ = Kind::kPeriodic;
    for (char c : pattern01) {
      if (c != '0' && c != '1') throw std::invalid_argument("periodic pattern must be over {0,1}");
      r.bits_.push_back(c == '1' ? 1 : 0);
    }
    if (r.bits_.empty()) throw std::invalid_argument("empty periodic pattern");
    return r;
  }

  // 0 at the square positions 1, 4, 9, 16, ... and 1 elsewhere; the number of
  // zeros in the first n symbols is floor(sqrt(n)).
  static SequenceRule zeros_at_squares() {
    SequenceRule r;
    r.kind_ = Kind::kZerosAtSquares;
    return r;
  }

  // Like zeros_at_squares but skipping squares below m*m; gives distinct
  // members of the same sparse-zeros family.
  static SequenceRule zeros_at_squares_from(int first_m) {
    if (first_m < 1) throw std::invalid_argument("first_m must be >= 1");
    SequenceRule r;
    r.kind_ = Kind::kZerosAtSquares;
    r.first_square_ = first_m;
    return r;
  }

  // A stored prefix; positions beyond it repeat the final bit. Used to wrap
  // finite constructions (adversary outputs) as total rules.
  static SequenceRule explicit_then_hold(std::vector<int> bits) {
    if (bits.empty()) throw std::invalid_argument("explicit rule needs at least one bit");
    for (int b : bits)
      if (b != 0 && b != 1) throw std::invalid_argument("explicit rule bits must be 0/1");
    SequenceRule r;
    r.kind_ = Kind::kExplicit;
    r.bits_ = std::move(bits);
    return r;
  }

  int bit_at(std::int64_t pos) const {  // 1-based
    if (pos < 1) throw std::invalid_argument("sequence positions are 1-based");
    switch (kind_) {
      case Kind::kPeriodic:
        return bits_[static_cast<std::size_t>((pos - 1) % static_cast<std::int64_t>(bits_.size()))];
      case Kind::kZerosAtSquares: {
        auto root = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(pos))));
        bool square = (root * root == pos) || ((root + 1) * (root + 1) == pos) || ((root - 1) * (root - 1) == pos);
        if (square) {
          std::int64_t m = root;
          if ((root + 1) * (root + 1) == pos) m = root + 1;
          if (root >= 1 && (root - 1) * (root - 1) == pos) m = root - 1;
          return m >= first_square_ ? 0 : 1;
        }
        return 1;
      }
      case Kind::kExplicit: {
        auto i = static_cast<std::size_t>(pos - 1);
        return i < bits_.size() ? bits_[i] : bits_.back();
      }
    }
    throw std::logic_error("unreachable");
  }

  // First n bits as a string, mostly for messages/tests.
  std::string prefix_string(int n) const {
    std::string out;
    for (int i = 1; i <= n; ++i) out += static_cast<char>('0' + bit_at(i));
    return out;
  }

  nlohmann::json to_json() const {
    switch (kind_) {
      case Kind::kPeriodic: {
        std::string pat;
        for (int b : bits_) pat += static_cast<char>('0' + b);
        return {{"kind", "periodic"}, {"pattern", pat}};
      }
      case Kind::kZerosAtSquares:
        if (first_square_ != 1) return {{"kind", "zeros_at_squares"}, {"first_square", first_square_}};
        return {{"kind", "zeros_at_squares"}};
      case Kind::kExplicit: {
        std::string pat;
        for (int b : bits_) pat += static_cast<char>('0' + b);
        return {{"kind", "explicit"}, {"bits", pat}, {"then", "hold"}};
      }
    }
    throw std::logic_error("unreachable");
  }

  static SequenceRule from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "periodic") return periodic(j.at("pattern").get<std::string>());
    if (kind == "zeros_at_squares") return zeros_at_squares_from(j.value("first_square", 1));
    if (kind == "explicit") {
      std::vector<int> bits;
      for (char c : j.at("bits").get<std::string>()) bits.push_back(c == '1' ? 1 : 0);
      return explicit_then_hold(std::move(bits));
    }
    throw std::invalid_argument("unknown sequence rule kind: " + kind);
  }

  // CLI shorthand: "squares" | "squares:M" | a 0/1 pattern repeated periodically.
  static SequenceRule parse_spec(const std::string& spec) {
    if (spec == "squares") return zeros_at_squares();
    if (spec.rfind("squares:", 0) == 0) return zeros_at_squares_from(std::stoi(spec.substr(8)));
    return periodic(spec);
  }

  bool operator==(const SequenceRule& o) const {
    return kind_ == o.kind_ && bits_ == o.bits_ && first_square_ == o.first_square_;
  }

 private:
  enum class Kind { kPeriodic, kZerosAtSquares, kExplicit };
  SequenceRule() = default;
  Kind kind_ = Kind::kPeriodic;
  std::vector<int> bits_;
  int first_square_ = 1;
};

}  // namespace seqpred
