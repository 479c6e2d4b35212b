#pragma once

#include <utility>

#include "apnc/common.hpp"

namespace apnc {

/// Zadoff-Chu preamble layout: a Q-point ZC body with G-point cyclic prefix
/// and suffix. Node B carries the base sequence, node A its floor(Q/2)-point
/// cyclic shift.
struct PreambleSpec {
    int Q = 31;
    int root = 1;
    int G = 10;

    int shift_b() const { return Q / 2; }
    void validate() const;
};

enum class Node { A, B };

struct SymbolFrame {
    cvec preamble_part;  // length Q + 2G
    cvec data_part;      // BPSK +-1
    Node node = Node::A;
    int zc_start = 0;  // symbol index of the ZC body inside the frame (== G)

    cvec all_symbols() const;
    size_t size() const { return preamble_part.size() + data_part.size(); }
};

/// z[n] = exp(-j pi root n(n+1)/Q), n = 0..Q-1 (odd-length CAZAC form).
cvec zc_generate(int q, int root);

/// (z_A, z_B): z_B is the base sequence, z_A its cyclic shift by floor(Q/2).
std::pair<cvec, cvec> assign_pair(const PreambleSpec& spec);

/// [last G of z] ++ z ++ [first G of z]; any length-Q window at offset
/// 0..2G is a cyclic rotation of z.
cvec cyclic_extend(const cvec& z, int g);

SymbolFrame build_frame(const PreambleSpec& spec, Node node, const cvec& data);

}  // namespace apnc
