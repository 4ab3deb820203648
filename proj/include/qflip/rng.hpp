#pragma once

#include <cstdint>

namespace qflip {

// Counter-based pseudorandom bit source keyed by (seed, stream).  The word
// sequence is SplitMix64 starting from state seed + stream·0xBF58476D1CE4E5B9;
// the stream stride is a different odd constant than the word stride, so
// distinct streams of the same seed do not share word subsequences.  Pinned:
// changing any constant invalidates the frozen test vectors.
class BitStream {
  public:
    BitStream(std::uint64_t seed, std::uint64_t stream)
        : state_(seed + stream * 0xBF58476D1CE4E5B9ULL) {}

    std::uint64_t next_word() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // low bit first within each word
    bool next_bit() {
        if (bits_left_ == 0) {
            word_ = next_word();
            bits_left_ = 64;
        }
        bool b = word_ & 1;
        word_ >>= 1;
        --bits_left_;
        return b;
    }

  private:
    std::uint64_t state_;
    std::uint64_t word_ = 0;
    int bits_left_ = 0;
};

}  // namespace qflip
