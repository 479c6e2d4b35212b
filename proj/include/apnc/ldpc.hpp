#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>

#include "apnc/common.hpp"

namespace apnc {

/// Regular (3,6) LDPC code with a systematic encoder. The parity-check
/// matrix comes from a seeded random edge assignment with 4-cycle removal;
/// the column order is then fixed so the last n-k columns are invertible
/// (systematic positions first). Both end nodes use the same code, so the
/// relay can run plain belief propagation on the XOR soft information.
class LdpcCode {
  public:
    static constexpr uint64_t kDefaultSeed = 0x51ac5eedULL;

    LdpcCode(int n, int k, uint64_t seed);

    /// The (1024, 512) code used throughout the experiments.
    static const LdpcCode& standard();

    int n() const { return n_; }
    int k() const { return k_; }

    std::vector<uint8_t> encode(std::span<const uint8_t> message) const;
    bool check(std::span<const uint8_t> codeword) const;

    struct DecodeResult {
        std::vector<uint8_t> bits;  // systematic part, length k
        bool converged = false;
        int iterations = 0;
    };
    /// Sum-product decoding; llr[i] = ln(P(bit=0)/P(bit=1)), finite.
    DecodeResult bp_decode(std::span<const double> llr, int max_iters = 50) const;

    const std::vector<std::vector<int>>& row_cols() const { return row_cols_; }

    void write_alist(std::ostream& os) const;
    static LdpcCode read_alist(std::istream& is);

  private:
    LdpcCode() = default;
    void build_encoder();

    int n_ = 0, k_ = 0, m_ = 0;
    std::vector<std::vector<int>> row_cols_;  // per check, connected columns
    std::vector<std::vector<int>> col_rows_;  // per column, connected checks
    // parity generator: p = P m over GF(2), rows packed in 64-bit words
    std::vector<uint64_t> parity_gen_;
    int words_per_row_ = 0;
};

}  // namespace apnc
