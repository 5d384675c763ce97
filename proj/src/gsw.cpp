#include "tdac/gsw.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <limits>

#include <fmt/format.h>

#include "tdac/errors.hpp"
#include "tdac/parallel.hpp"
#include "tdac/random.hpp"

namespace tdac {

namespace {

unsigned log2_ceil(Residue q) { return static_cast<unsigned>(std::bit_width(q - 1)); }

Residue uniform_residue(Rng& rng, Residue q) {
    return std::uniform_int_distribution<Residue>(0, q - 1)(rng);
}

// Largest |sum e_j| accepted during keygen. Keys whose noise vector is
// strongly biased push the decryption error of R * e (R uniform over {0,1})
// towards the rounding boundary.
std::int64_t noise_bias_bound(const GswParams& p) {
    return p.error_bound * static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(p.m))));
}

}  // namespace

std::int64_t centered(Residue x, Residue q) {
    x %= q;
    auto v = static_cast<std::int64_t>(x);
    if (x >= q / 2 && q > 1) v -= static_cast<std::int64_t>(q);
    return v;
}

void GswParams::validate() const {
    if (n < 1) throw ParameterError("gsw: n must be positive");
    if (q < 2 || !std::has_single_bit(q)) throw ParameterError(fmt::format("gsw: q = {} is not a power of two >= 2", q));
    if (q > (Residue{1} << 32)) throw ParameterError("gsw: q above 2^32 is not supported");
    if (m < 1) throw ParameterError("gsw: m must be positive");
    if (ell != log2_ceil(q)) throw ParameterError("gsw: ell != ceil(log2 q)");
    if (N != (n + 1) * ell) throw ParameterError("gsw: N != (n + 1) * ell");
    if (error_bound < 0) throw ParameterError("gsw: negative error bound");
    // A single noise term must stay inside the rounding margin q/8.
    if (8 * static_cast<Residue>(error_bound) >= q && error_bound > 0)
        throw ParameterError(fmt::format("gsw: error bound {} too large for q = {} (need B < q/8)", error_bound, q));
}

GswParams GswParams::make(std::size_t n, Residue q, std::size_t m, std::int64_t error_bound,
                          std::uint64_t seed) {
    if (q < 2 || !std::has_single_bit(q)) throw ParameterError(fmt::format("gsw: q = {} is not a power of two >= 2", q));
    GswParams p;
    p.n = n;
    p.q = q;
    p.ell = log2_ceil(q);
    p.N = (n + 1) * p.ell;
    p.m = m == 0 ? 2 * p.N : m;
    p.error_bound = error_bound;
    p.seed = seed;
    p.validate();
    return p;
}

GswParams GswParams::leaky(std::size_t n, std::uint64_t seed) {
    return make(n, 2, kLeakySamples, 0, seed);
}

GswParams GswParams::for_side(std::size_t side, bool leaky_mode, std::int64_t error_bound,
                              std::uint64_t seed) {
    if (side < 2) throw ParameterError("gsw: target side must be at least 2");
    if (leaky_mode) return leaky(side - 1, seed);
    bool found = false;
    std::size_t best_n = 0;
    unsigned best_ell = 0;
    auto score = [&](std::size_t n, unsigned ell) {
        std::size_t N = (n + 1) * ell;
        std::size_t dist = N > side ? N - side : side - N;
        std::size_t shape = n > ell ? n - ell : ell - n;
        return std::tuple{dist, shape, N};
    };
    for (unsigned ell = 1; ell <= 32; ++ell) {
        Residue q = Residue{1} << ell;
        if (error_bound > 0 && 8 * static_cast<Residue>(error_bound) >= q) continue;
        for (std::size_t n = 1; (n + 1) * ell <= 2 * side; ++n) {
            if (!found || score(n, ell) < score(best_n, best_ell)) {
                found = true;
                best_n = n;
                best_ell = ell;
            }
        }
    }
    if (!found) throw ParameterError(fmt::format("gsw: no parameters reach side {}", side));
    return make(best_n, Residue{1} << best_ell, 0, error_bound, seed);
}

std::string GswParams::id() const {
    return fmt::format("gsw(n={},q={},m={},B={})", n, q, m, error_bound);
}

KeyPair keygen(const GswParams& params, std::uint64_t rng_seed) {
    params.validate();
    Rng rng = derive_rng(rng_seed, 0, /*domain=*/1);
    const std::size_t cols = params.n + 1;
    const Residue q = params.q;
    const Residue mask = q - 1;

    KeyPair kp;
    kp.sk.s.resize(params.n);
    for (auto& x : kp.sk.s) x = uniform_residue(rng, q);
    kp.sk.t.resize(cols);
    kp.sk.t[0] = 1 % q;
    for (std::size_t j = 0; j < params.n; ++j) kp.sk.t[j + 1] = (q - kp.sk.s[j]) & mask;

    std::vector<std::int64_t> e(params.m);
    std::uniform_int_distribution<std::int64_t> noise(-params.error_bound, params.error_bound);
    const std::int64_t bias_bound = noise_bias_bound(params);
    for (;;) {
        std::int64_t sum = 0;
        for (auto& x : e) {
            x = noise(rng);
            sum += x;
        }
        if (std::llabs(sum) <= bias_bound) break;
    }

    kp.pk.params = params;
    kp.pk.A = ResidueMatrix(params.m, cols);
    for (std::size_t i = 0; i < params.m; ++i) {
        Residue b = 0;
        for (std::size_t j = 1; j < cols; ++j) {
            Residue a = uniform_residue(rng, q);
            kp.pk.A.at(i, j) = a;
            b += a * kp.sk.s[j - 1];
        }
        // b = <a', s> + e so that <A_i, t> = b - <a', s> = e
        b += static_cast<Residue>(e[i] + static_cast<std::int64_t>(q));
        kp.pk.A.at(i, 0) = b & mask;
    }
    return kp;
}

std::vector<std::uint8_t> bit_decomp(std::span<const Residue> v, const GswParams& params) {
    std::vector<std::uint8_t> out;
    out.reserve(v.size() * params.ell);
    for (Residue x : v) {
        if (x >= params.q) throw ParameterError(fmt::format("bit_decomp: entry {} outside [0, {})", x, params.q));
        for (unsigned j = 0; j < params.ell; ++j) out.push_back(static_cast<std::uint8_t>((x >> j) & 1u));
    }
    return out;
}

std::vector<Residue> bit_decomp_inverse(std::span<const Residue> b, const GswParams& params) {
    if (params.ell == 0 || b.size() % params.ell != 0)
        throw ShapeError(fmt::format("bit_decomp_inverse: length {} not divisible by ell = {}", b.size(), params.ell));
    const Residue mask = params.q - 1;
    std::vector<Residue> out(b.size() / params.ell, 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        Residue acc = 0;
        for (unsigned j = 0; j < params.ell; ++j) acc += (b[i * params.ell + j] & mask) << j;
        out[i] = acc & mask;
    }
    return out;
}

std::vector<Residue> powers_of_two(std::span<const Residue> t, const GswParams& params) {
    const Residue mask = params.q - 1;
    std::vector<Residue> out;
    out.reserve(t.size() * params.ell);
    for (Residue x : t)
        for (unsigned j = 0; j < params.ell; ++j) out.push_back((x << j) & mask);
    return out;
}

BitMatrix flatten(const ResidueMatrix& M, const GswParams& params) {
    if (M.cols != params.N)
        throw ShapeError(fmt::format("flatten: matrix has {} columns, expected N = {}", M.cols, params.N));
    BitMatrix out(M.rows, M.cols);
    for (std::size_t r = 0; r < M.rows; ++r) {
        auto packed = bit_decomp_inverse(M.row(r), params);
        auto bits = bit_decomp(packed, params);
        std::copy(bits.begin(), bits.end(), out.bits.begin() + static_cast<std::ptrdiff_t>(r * M.cols));
    }
    return out;
}

Ciphertext encrypt(const PublicKey& pk, int mu, std::uint64_t rng_seed) {
    if (mu != 0 && mu != 1) throw ParameterError("encrypt: plaintext must be 0 or 1");
    const GswParams& p = pk.params;
    const std::size_t cols = p.n + 1;
    if (pk.A.rows != p.m || pk.A.cols != cols) throw ShapeError("encrypt: public key shape does not match params");
    const Residue mask = p.q - 1;
    Rng rng = derive_rng(rng_seed, 0, /*domain=*/2);

    // M = mu * I_N + BitDecomp(R * A), R uniform over {0,1}^(N x m)
    ResidueMatrix M(p.N, p.N);
    std::vector<Residue> ra(cols);
    for (std::size_t i = 0; i < p.N; ++i) {
        std::fill(ra.begin(), ra.end(), 0);
        std::uint64_t word = 0;
        unsigned left = 0;
        for (std::size_t k = 0; k < p.m; ++k) {
            if (left == 0) {
                word = rng();
                left = 64;
            }
            bool pick = word & 1u;
            word >>= 1;
            --left;
            if (!pick) continue;
            for (std::size_t j = 0; j < cols; ++j) ra[j] += pk.A.at(k, j);
        }
        for (auto& x : ra) x &= mask;
        auto bits = bit_decomp(ra, p);
        for (std::size_t c = 0; c < p.N; ++c) M.at(i, c) = bits[c];
        M.at(i, i) += static_cast<Residue>(mu);
    }
    return Ciphertext{flatten(M, p), p.id()};
}

int decrypt(const SecretKey& sk, const GswParams& params, const Ciphertext& C) {
    if (C.bits.rows != params.N || C.bits.cols != params.N)
        throw ShapeError(fmt::format("decrypt: ciphertext is {}x{}, params expect {}x{}", C.bits.rows, C.bits.cols,
                                     params.N, params.N));
    if (sk.t.size() != params.n + 1) throw ShapeError("decrypt: secret key does not match params");
    const Residue q = params.q;
    const Residue mask = q - 1;
    auto v = powers_of_two(sk.t, params);

    // Rows whose v_i sits at circular distance > q/4 from 0 separate the two
    // plaintexts by more than q/4. Each contributes the squared distance of
    // <C_i, v> to 0 and to v_i; the smaller total wins, ties go to 0.
    unsigned __int128 score0 = 0, score1 = 0;
    std::size_t rows = 0;
    for (std::size_t i = 0; i < params.N; ++i) {
        Residue sep = std::min(v[i], (q - v[i]) & mask);
        if (!(4 * sep > q)) continue;
        Residue dot = 0;
        for (std::size_t c = 0; c < params.N; ++c)
            if (C.bits.at(i, c)) dot += v[c];
        dot &= mask;
        auto d0 = centered(dot, q);
        auto d1 = centered((dot + q - v[i]) & mask, q);
        score0 += static_cast<unsigned __int128>(d0 * d0);
        score1 += static_cast<unsigned __int128>(d1 * d1);
        ++rows;
    }
    if (rows == 0) throw ContractError("decrypt: secret key has no usable decoding row");
    return score1 < score0 ? 1 : 0;
}

GeneratedDataset generate_dataset(const GswParams& params, std::size_t count_per_class, std::uint64_t seed,
                                  unsigned jobs) {
    if (count_per_class < 1) throw DataError("generate_dataset: count_per_class must be >= 1");
    GeneratedDataset out;
    out.keys = keygen(params, seed);
    out.samples.resize(2 * count_per_class);
    parallel_for(out.samples.size(), jobs, [&](std::size_t i) {
        int label = static_cast<int>(i % 2);
        Rng stream = derive_rng(seed, i, /*domain=*/3);
        out.samples[i] = LabeledCiphertext{encrypt(out.keys.pk, label, stream()), label};
    });
    return out;
}

}  // namespace tdac
