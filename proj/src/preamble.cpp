#include "apnc/preamble.hpp"

#include <cmath>
#include <numeric>

namespace apnc {

void PreambleSpec::validate() const {
    require(Q > 0 && Q % 2 == 1, "Q must be a positive odd integer");
    require(root > 0 && std::gcd(root, Q) == 1, "root must be coprime with Q");
    require(G > 0 && G < Q, "G must satisfy 0 < G < Q");
}

cvec zc_generate(int q, int root) {
    require(q > 0 && q % 2 == 1, "Q must be a positive odd integer");
    require(root > 0 && std::gcd(root, q) == 1, "root must be coprime with Q");
    cvec z(static_cast<size_t>(q));
    for (int n = 0; n < q; ++n) {
        // phase = -pi root n(n+1)/Q; reduce mod 2Q before the division to keep
        // the argument small for large Q.
        const long long k =
            (static_cast<long long>(root) * n % (2LL * q)) * (n + 1) % (2LL * q);
        const double phase = -kPi * static_cast<double>(k) / q;
        z[static_cast<size_t>(n)] = std::polar(1.0, phase);
    }
    return z;
}

std::pair<cvec, cvec> assign_pair(const PreambleSpec& spec) {
    spec.validate();
    const cvec z_b = zc_generate(spec.Q, spec.root);
    cvec z_a(z_b.size());
    const int shift = spec.shift_b();
    for (int n = 0; n < spec.Q; ++n) {
        z_a[static_cast<size_t>(n)] = z_b[static_cast<size_t>((n + shift) % spec.Q)];
    }
    return {z_a, z_b};
}

cvec cyclic_extend(const cvec& z, int g) {
    const int q = static_cast<int>(z.size());
    require(g > 0 && g < q, "G must satisfy 0 < G < Q");
    cvec out;
    out.reserve(static_cast<size_t>(q + 2 * g));
    for (int n = q - g; n < q; ++n) out.push_back(z[static_cast<size_t>(n)]);
    out.insert(out.end(), z.begin(), z.end());
    for (int n = 0; n < g; ++n) out.push_back(z[static_cast<size_t>(n)]);
    return out;
}

SymbolFrame build_frame(const PreambleSpec& spec, Node node, const cvec& data) {
    spec.validate();
    for (const cplx& s : data) {
        require(s.imag() == 0.0 && (s.real() == 1.0 || s.real() == -1.0),
                "data symbols must be BPSK +-1");
    }
    auto [z_a, z_b] = assign_pair(spec);
    SymbolFrame f;
    f.node = node;
    f.zc_start = spec.G;
    f.preamble_part = cyclic_extend(node == Node::A ? z_a : z_b, spec.G);
    f.data_part = data;
    return f;
}

cvec SymbolFrame::all_symbols() const {
    cvec out = preamble_part;
    out.insert(out.end(), data_part.begin(), data_part.end());
    return out;
}

}  // namespace apnc
