#pragma once

#include <stdexcept>
#include <string>

namespace modeconn {

/// Failure categories. Each maps to a distinct CLI exit code (code value + 10).
enum class Errc {
  invalid_params = 1,
  no_edges,
  empty_mask,
  dimension_mismatch,
  training_diverged,
  range_error,
  collinear_modes,
  isolated_node,
  invalid_split,
  undefined_correlation,
  incompatible_domains,
  parse_error,
  corrupt_checkpoint,
  not_symmetric,
  io_error,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}
  Errc code() const { return code_; }
  // Context index: epoch for training_diverged, line number for parse_error.
  long index = -1;

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

[[noreturn]] inline void fail_at(Errc code, const std::string& msg, long index) {
  Error e(code, msg);
  e.index = index;
  throw e;
}

}  // namespace modeconn
