#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cis {

inline constexpr const char* version = "0.1.0";

// all precondition and data errors thrown by this library
struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw error(msg);
}

// sorted, duplicate-free set of 0-based column indices
using ActiveSet = std::vector<int>;

inline bool is_valid_active_set(const ActiveSet& s, int p) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0 || s[i] >= p) return false;
    if (i > 0 && s[i] <= s[i - 1]) return false;
  }
  return true;
}

inline ActiveSet merge_active(const ActiveSet& a, const ActiveSet& b) {
  ActiveSet out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i] < b[j])) {
      if (out.empty() || out.back() != a[i]) out.push_back(a[i]);
      ++i;
    } else {
      if (out.empty() || out.back() != b[j]) out.push_back(b[j]);
      ++j;
    }
  }
  return out;
}

}  // namespace cis
