#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fourierident/error.hpp"

namespace fident {

/// A candidate term d^alpha/dx^alpha (u^beta).
struct Feature {
  int alpha = 0;
  int beta = 0;

  friend bool operator==(const Feature&, const Feature&) = default;
};

inline std::string feature_name(const Feature& f) {
  if (f.beta == 0) return "1";
  std::string base = f.beta == 1 ? "u" : "u^" + std::to_string(f.beta);
  if (f.alpha == 0) return base;
  const std::string deriv(static_cast<std::size_t>(f.alpha), 'x');
  return f.beta == 1 ? base + "_" + deriv : "(" + base + ")_" + deriv;
}

class Dictionary {
 public:
  Dictionary() = default;

  explicit Dictionary(std::vector<Feature> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& f = entries_[i];
      if (f.alpha < 0 || f.beta < 0) throw Error(ErrorKind::InvalidParameter, "negative feature order");
      if (f.beta == 0 && f.alpha != 0)
        throw Error(ErrorKind::InvalidParameter, "beta = 0 is only allowed for the constant feature");
      for (std::size_t j = 0; j < i; ++j)
        if (entries_[j] == f) throw Error(ErrorKind::InvalidParameter, "duplicate feature " + feature_name(f));
    }
  }

  std::size_t size() const { return entries_.size(); }
  const Feature& operator[](std::size_t l) const { return entries_[l]; }
  const std::vector<Feature>& entries() const { return entries_; }
  std::string name(std::size_t l) const { return feature_name(entries_[l]); }

  std::optional<int> index_of(Feature f) const {
    for (std::size_t l = 0; l < entries_.size(); ++l)
      if (entries_[l] == f) return static_cast<int>(l);
    return std::nullopt;
  }

  int max_alpha() const {
    int m = 0;
    for (const auto& f : entries_) m = std::max(m, f.alpha);
    return m;
  }

  int max_beta() const {
    int m = 0;
    for (const auto& f : entries_) m = std::max(m, f.beta);
    return m;
  }

 private:
  std::vector<Feature> entries_;
};

/// {1} followed by every (alpha, beta) with 0 <= alpha <= max_alpha, 1 <= beta <= max_beta,
/// beta-major. (6, 6) gives the 43-term library.
inline Dictionary build_dictionary(int max_alpha, int max_beta) {
  if (max_alpha < 1 || max_beta < 1)
    throw Error(ErrorKind::InvalidParameter, "dictionary bounds must be at least 1");
  std::vector<Feature> entries{{0, 0}};
  for (int beta = 1; beta <= max_beta; ++beta)
    for (int alpha = 0; alpha <= max_alpha; ++alpha) entries.push_back({alpha, beta});
  return Dictionary(std::move(entries));
}

}  // namespace fident
