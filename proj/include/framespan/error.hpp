#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace framespan {

// Base class for everything thrown by the library.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input validation failures (corpus, ontology, config, alignment).
// The CLI maps these to exit code 2.
struct data_error : error {
  explicit data_error(const std::string& msg) : error(msg) {}
};

// Non-finite values during training. The CLI maps these to exit code 3.
struct numeric_error : error {
  explicit numeric_error(const std::string& msg) : error(msg) {}
};

namespace detail {

template <class... Args>
std::string cat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace detail

inline std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t k = 0; k < shape.size(); ++k) {
    if (k) os << ' ';
    os << shape[k];
  }
  os << ']';
  return os.str();
}

}  // namespace framespan
