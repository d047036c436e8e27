#ifndef MSGD_TRACE_HPP
#define MSGD_TRACE_HPP

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace msgd {

struct Checkpoint {
  std::size_t iteration = 0;
  double sq_error = 0.0;
};

/// Squared distance to x* recorded along one run.
struct TrialTrace {
  std::uint64_t seed = 0;
  std::vector<Checkpoint> checkpoints;
  std::string config_digest;

  double final_sq_error() const { return checkpoints.empty() ? 0.0 : checkpoints.back().sq_error; }
};

struct AggregateCheckpoint {
  std::size_t iteration = 0;
  double mean_sq_error = 0.0;
  std::size_t trial_count = 0;
};

struct AggregateTrace {
  std::vector<AggregateCheckpoint> checkpoints;
  std::string config_digest;

  double final_mean() const { return checkpoints.empty() ? 0.0 : checkpoints.back().mean_sq_error; }
};

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& os, const AggregateTrace& trace) {
  os << "iteration,mean_sq_error,trial_count\n";
  for (const auto& c : trace.checkpoints) {
    os << c.iteration << ',' << format_double(c.mean_sq_error) << ',' << c.trial_count << '\n';
  }
}

}  // namespace msgd

#endif  // MSGD_TRACE_HPP
