#pragma once

// Toy GSW13 public-key encryption of single bits. Ciphertexts are flattened
// N x N binary matrices, N = (n + 1) * ceil(log2 q). This is an encryption
// oracle for experiments, not a secure implementation.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tdac {

using Residue = std::uint64_t;

struct GswParams {
    std::size_t n = 6;
    Residue q = 64;
    unsigned ell = 6;
    std::size_t m = 84;
    std::size_t N = 42;
    std::int64_t error_bound = 1;
    std::uint64_t seed = 0;

    // Validates and fills the derived fields. m == 0 selects m = 2N.
    static GswParams make(std::size_t n, Residue q, std::size_t m = 0, std::int64_t error_bound = 1,
                          std::uint64_t seed = 0);

    // Noise-free, q = 2 parameters with a tiny sample count; the resulting
    // ciphertexts leak the plaintext through low-rank structure.
    static GswParams leaky(std::size_t n, std::uint64_t seed = 0);

    // Honest-mode parameters whose side (n + 1) * ell is closest to `side`.
    // In leaky mode q = 2, so n = side - 1 exactly.
    static GswParams for_side(std::size_t side, bool leaky, std::int64_t error_bound = 1,
                              std::uint64_t seed = 0);

    bool is_leaky() const { return error_bound == 0 && q == 2; }
    std::string id() const;
    void validate() const;

    friend bool operator==(const GswParams&, const GswParams&) = default;
};

inline constexpr std::size_t kLeakySamples = 1;

// Row-major matrix of residues.
struct ResidueMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Residue> data;

    ResidueMatrix() = default;
    ResidueMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}
    Residue& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    Residue at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const Residue> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    friend bool operator==(const ResidueMatrix&, const ResidueMatrix&) = default;
};

// Row-major {0,1} matrix.
struct BitMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> bits;

    BitMatrix() = default;
    BitMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), bits(r * c, 0) {}
    std::uint8_t& at(std::size_t r, std::size_t c) { return bits[r * cols + c]; }
    std::uint8_t at(std::size_t r, std::size_t c) const { return bits[r * cols + c]; }

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;
};

struct SecretKey {
    std::vector<Residue> s;
    std::vector<Residue> t;  // (1, -s_1, ..., -s_n) mod q
};

struct PublicKey {
    GswParams params;
    ResidueMatrix A;  // m x (n + 1), A * t = e (mod q)
};

struct KeyPair {
    SecretKey sk;
    PublicKey pk;
};

struct Ciphertext {
    BitMatrix bits;
    std::string params_id;

    friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

// Centered representative in [-q/2, q/2).
std::int64_t centered(Residue x, Residue q);

KeyPair keygen(const GswParams& params, std::uint64_t rng_seed);

std::vector<std::uint8_t> bit_decomp(std::span<const Residue> v, const GswParams& params);
std::vector<Residue> bit_decomp_inverse(std::span<const Residue> b, const GswParams& params);
std::vector<Residue> powers_of_two(std::span<const Residue> t, const GswParams& params);

// Rowwise BitDecomp(BitDecomp^-1(row)). Input entries are arbitrary residues.
BitMatrix flatten(const ResidueMatrix& M, const GswParams& params);

Ciphertext encrypt(const PublicKey& pk, int mu, std::uint64_t rng_seed);
int decrypt(const SecretKey& sk, const GswParams& params, const Ciphertext& C);

struct LabeledCiphertext {
    Ciphertext ct;
    int label = 0;
};

struct GeneratedDataset {
    KeyPair keys;
    std::vector<LabeledCiphertext> samples;  // labels alternate 0, 1, 0, 1, ...
};

// One key pair, then 2 * count_per_class fresh encryptions. Sample i uses an
// RNG stream derived from (seed, i), so `jobs` never changes the output.
GeneratedDataset generate_dataset(const GswParams& params, std::size_t count_per_class,
                                  std::uint64_t seed, unsigned jobs = 1);

}  // namespace tdac
