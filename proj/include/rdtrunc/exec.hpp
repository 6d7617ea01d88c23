// Execution policy plumbing.  Parallel code paths must produce bit-identical
// results to the serial reference: work is split into fixed-size chunks whose
// boundaries do not depend on the thread count, each chunk writes into its own
// slot, and slots are folded serially in index order afterwards.

#ifndef RDTRUNC_EXEC_HPP
#define RDTRUNC_EXEC_HPP

#include <cstdint>

namespace rdtrunc {

enum class ExecPolicy { serial, parallel };

// (value, tag) pairs folded lexicographically: smaller value wins, ties go to
// the smaller tag.  Gives a schedule-independent argmin.
struct TaggedValue {
  double value;
  int64_t tag;
};

inline bool better(const TaggedValue& a, const TaggedValue& b) {
  if (a.value != b.value) return a.value < b.value;
  return a.tag < b.tag;
}

inline int64_t chunk_count(int64_t total, int64_t chunk_size) {
  return (total + chunk_size - 1) / chunk_size;
}

}  // namespace rdtrunc

#endif  // RDTRUNC_EXEC_HPP
