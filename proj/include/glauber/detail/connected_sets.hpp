#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "glauber/error.hpp"

namespace glauber {
namespace detail {

// Include/exclude enumeration of connected vertex sets containing a seed.
// The extension list always equals N(S) minus S minus the excluded
// vertices, so each connected superset is produced on exactly one branch.
template <typename GraphT, typename Visitor>
class ConnectedSetEnumerator {
 public:
  ConnectedSetEnumerator(const GraphT& g, int k, std::int64_t cap, int lower_bound, Visitor& visit)
      : g_(g), k_(k), cap_(cap), lower_(lower_bound), visit_(visit),
        state_(scratch(static_cast<std::size_t>(g.num_vertices()))) {}

  std::int64_t run(int seed) {
    try {
      return run_unchecked(seed);
    } catch (...) {
      std::fill(state_.begin(), state_.end(), kNone);
      throw;
    }
  }

 private:
  enum : std::uint8_t { kNone = 0, kInSet = 1, kInExt = 2, kBanned = 3 };

  // Per-thread marker array; every run leaves it all-kNone again.
  static std::vector<std::uint8_t>& scratch(std::size_t n) {
    thread_local std::vector<std::uint8_t> buffer;
    if (buffer.size() < n) buffer.resize(n, kNone);
    return buffer;
  }

  std::int64_t run_unchecked(int seed) {
    set_.assign(1, seed);
    state_[seed] = kInSet;
    std::vector<int> ext;
    for (int x : g_.neighbors(seed)) {
      if (x >= lower_ && state_[x] == kNone) {
        state_[x] = kInExt;
        ext.push_back(x);
      }
    }
    extend(ext);
    for (int x : ext) state_[x] = kNone;
    state_[seed] = kNone;
    return count_;
  }

  void extend(std::vector<int> ext) {
    if (static_cast<int>(set_.size()) == k_) {
      if (++count_ > cap_) {
        throw Error(ErrorKind::kEnumerationOverflow,
                    "more than " + std::to_string(cap_) + " connected sets");
      }
      visit_(static_cast<const std::vector<int>&>(set_));
      return;
    }
    std::vector<int> banned;
    while (!ext.empty()) {
      const int w = ext.back();
      ext.pop_back();
      set_.push_back(w);
      state_[w] = kInSet;
      std::vector<int> next = ext;
      const std::size_t inherited = next.size();
      for (int x : g_.neighbors(w)) {
        if (x >= lower_ && state_[x] == kNone) {
          state_[x] = kInExt;
          next.push_back(x);
        }
      }
      extend(next);
      for (std::size_t i = inherited; i < next.size(); ++i) state_[next[i]] = kNone;
      set_.pop_back();
      state_[w] = kBanned;
      banned.push_back(w);
    }
    for (int w : banned) state_[w] = kInExt;
  }

  const GraphT& g_;
  int k_;
  std::int64_t cap_;
  int lower_;
  Visitor& visit_;
  std::vector<std::uint8_t>& state_;
  std::vector<int> set_;
  std::int64_t count_ = 0;
};

}  // namespace detail

template <typename Visitor>
std::int64_t for_each_connected_set_rooted_at_min(const Graph& g, int v, int k, std::int64_t cap,
                                                  Visitor&& visit) {
  if (k < 1 || cap < 1) throw Error(ErrorKind::kInvalidParameter, "k and cap must be >= 1");
  detail::ConnectedSetEnumerator<Graph, std::remove_reference_t<Visitor>> e(g, k, cap, v, visit);
  return e.run(v);
}

}  // namespace glauber
