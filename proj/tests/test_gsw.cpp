#include <doctest.h>

#include <random>

#include "tdac/errors.hpp"
#include "tdac/gsw.hpp"

using namespace tdac;

namespace {

// A·t mod q, centered, computed directly from the public key.
std::vector<std::int64_t> key_noise(const KeyPair& kp) {
    const auto& p = kp.pk.params;
    std::vector<std::int64_t> e;
    for (std::size_t r = 0; r < kp.pk.A.rows; ++r) {
        Residue acc = 0;
        for (std::size_t c = 0; c <= p.n; ++c) acc = (acc + kp.pk.A.at(r, c) * kp.sk.t[c]) % p.q;
        e.push_back(centered(acc, p.q));
    }
    return e;
}

}  // namespace

TEST_CASE("params derive ell and N") {
    auto p = GswParams::make(6, 64);
    CHECK(p.ell == 6);
    CHECK(p.N == 42);
    CHECK(p.m == 84);
    CHECK(p.id() == "gsw(n=6,q=64,m=84,B=1)");

    auto small = GswParams::make(2, 16, 8, 1);
    CHECK(small.ell == 4);
    CHECK(small.N == 12);
    CHECK(small.m == 8);
}

TEST_CASE("invalid params are rejected") {
    CHECK_THROWS_AS(GswParams::make(6, 48), ParameterError);
    CHECK_THROWS_AS(GswParams::make(0, 64), ParameterError);
    CHECK_THROWS_AS(GswParams::make(6, 1), ParameterError);
    CHECK_THROWS_AS(GswParams::make(6, 64, 0, -1), ParameterError);
    // noise must stay below q/8
    CHECK_THROWS_AS(GswParams::make(6, 64, 0, 8), ParameterError);
    CHECK_NOTHROW(GswParams::make(6, 64, 0, 7));
}

TEST_CASE("leaky and side-targeted params") {
    auto lk = GswParams::leaky(28);
    CHECK(lk.is_leaky());
    CHECK(lk.q == 2);
    CHECK(lk.N == 29);
    CHECK(lk.m == kLeakySamples);

    CHECK(GswParams::for_side(29, true).n == 28);
    CHECK(GswParams::for_side(33, true).N == 33);

    auto h = GswParams::for_side(42, false);
    CHECK(h.N == 42);
    CHECK_FALSE(h.is_leaky());
    CHECK(h.error_bound < static_cast<std::int64_t>(h.q / 8));
}

TEST_CASE("keygen satisfies the key invariant and is deterministic") {
    auto p = GswParams::make(2, 16, 8, 1);
    auto kp = keygen(p, 7);
    REQUIRE(kp.sk.t.size() == 3);
    CHECK(kp.sk.t[0] == 1);
    for (std::size_t i = 0; i < p.n; ++i) CHECK((kp.sk.t[i + 1] + kp.sk.s[i]) % p.q == 0);
    for (auto e : key_noise(kp)) CHECK(std::abs(e) <= 1);

    auto again = keygen(p, 7);
    CHECK(again.pk.A == kp.pk.A);
    CHECK(again.sk.s == kp.sk.s);
    CHECK_FALSE(keygen(p, 8).pk.A == kp.pk.A);
}

TEST_CASE("key noise bounded for many seeds") {
    auto p = GswParams::make(6, 64);
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        for (auto e : key_noise(keygen(p, seed))) CHECK(std::abs(e) <= p.error_bound);
}

TEST_CASE("bit_decomp examples") {
    auto q8 = GswParams::make(1, 8, 1, 0);
    std::vector<Residue> five{5};
    CHECK(bit_decomp(five, q8) == std::vector<std::uint8_t>{1, 0, 1});
    std::vector<Residue> zero{0};
    CHECK(bit_decomp(zero, q8) == std::vector<std::uint8_t>{0, 0, 0});
    auto q16 = GswParams::make(1, 16, 1, 0);
    std::vector<Residue> v{15, 1};
    CHECK(bit_decomp(v, q16) == std::vector<std::uint8_t>{1, 1, 1, 1, 1, 0, 0, 0});
    std::vector<Residue> bad{8};
    CHECK_THROWS_AS(bit_decomp(bad, q8), ParameterError);
}

TEST_CASE("bit_decomp_inverse examples") {
    auto q8 = GswParams::make(1, 8, 1, 0);
    std::vector<Residue> b{1, 0, 1};
    CHECK(bit_decomp_inverse(b, q8) == std::vector<Residue>{5});
    std::vector<Residue> z(6, 0);
    CHECK(bit_decomp_inverse(z, q8) == std::vector<Residue>{0, 0});
    std::vector<Residue> nonbit{3, 0, 0};
    CHECK(bit_decomp_inverse(nonbit, q8) == std::vector<Residue>{3});
    std::vector<Residue> wrong{1, 0};
    CHECK_THROWS_AS(bit_decomp_inverse(wrong, q8), ShapeError);
}

TEST_CASE("bit_decomp round trip on random vectors") {
    auto p = GswParams::make(3, 1024, 1, 0);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<Residue> d(0, p.q - 1);
    for (int it = 0; it < 200; ++it) {
        std::vector<Residue> v(p.n + 1);
        for (auto& x : v) x = d(rng);
        auto bits = bit_decomp(v, p);
        std::vector<Residue> wide(bits.begin(), bits.end());
        CHECK(bit_decomp_inverse(wide, p) == v);
    }
}

TEST_CASE("powers_of_two pairs with bit_decomp") {
    auto p = GswParams::make(2, 32, 1, 0);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<Residue> d(0, p.q - 1);
    for (int it = 0; it < 100; ++it) {
        std::vector<Residue> a(p.n + 1), b(p.n + 1);
        for (auto& x : a) x = d(rng);
        for (auto& x : b) x = d(rng);
        auto bd = bit_decomp(a, p);
        auto pw = powers_of_two(b, p);
        Residue lhs = 0, rhs = 0;
        for (std::size_t i = 0; i < bd.size(); ++i) lhs = (lhs + bd[i] * pw[i]) % p.q;
        for (std::size_t i = 0; i < a.size(); ++i) rhs = (rhs + a[i] * b[i]) % p.q;
        CHECK(lhs == rhs);
    }
}

TEST_CASE("flatten examples and properties") {
    auto p = GswParams::make(1, 8, 1, 0);  // ell = 3, N = 6
    ResidueMatrix M(1, 6);
    M.at(0, 0) = 2;
    auto F = flatten(M, p);
    CHECK(std::vector<std::uint8_t>(F.bits.begin(), F.bits.end()) == std::vector<std::uint8_t>{0, 1, 0, 0, 0, 0});

    ResidueMatrix wrong(1, 5);
    CHECK_THROWS_AS(flatten(wrong, p), ShapeError);

    auto big = GswParams::make(2, 16, 1, 0);  // N = 12
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<Residue> d(0, 50);
    for (int it = 0; it < 50; ++it) {
        ResidueMatrix R(4, big.N);
        for (auto& x : R.data) x = d(rng);
        auto f1 = flatten(R, big);
        for (auto b : f1.bits) CHECK(b <= 1);
        ResidueMatrix again(f1.rows, f1.cols);
        for (std::size_t i = 0; i < f1.bits.size(); ++i) again.data[i] = f1.bits[i];
        CHECK(flatten(again, big) == f1);
        for (std::size_t r = 0; r < R.rows; ++r) {
            std::vector<Residue> row_in(R.row(r).begin(), R.row(r).end());
            std::vector<Residue> row_out(again.row(r).begin(), again.row(r).end());
            CHECK(bit_decomp_inverse(row_in, big) == bit_decomp_inverse(row_out, big));
        }
    }
}

TEST_CASE("encrypt is deterministic, square and round trips") {
    auto p = GswParams::make(6, 64);
    auto kp = keygen(p, 1);
    auto c0 = encrypt(kp.pk, 0, 99);
    CHECK(c0.bits.rows == 42);
    CHECK(c0.bits.cols == 42);
    CHECK(c0 == encrypt(kp.pk, 0, 99));
    CHECK(c0.params_id == p.id());
    for (std::uint64_t s = 0; s < 100; ++s) {
        CHECK(decrypt(kp.sk, p, encrypt(kp.pk, 0, s)) == 0);
        CHECK(decrypt(kp.sk, p, encrypt(kp.pk, 1, s)) == 1);
    }
    CHECK_THROWS_AS(encrypt(kp.pk, 2, 0), ParameterError);
}

TEST_CASE("round trip across parameter sets") {
    for (auto p : {GswParams::make(3, 32), GswParams::make(4, 256, 0, 3), GswParams::make(10, 1024, 0, 2)}) {
        for (std::uint64_t k = 0; k < 10; ++k) {
            auto kp = keygen(p, k);
            for (std::uint64_t s = 0; s < 10; ++s)
                for (int mu : {0, 1}) CHECK(decrypt(kp.sk, p, encrypt(kp.pk, mu, s * 2 + static_cast<std::uint64_t>(mu))) == mu);
        }
    }
}

TEST_CASE("decrypt edge cases") {
    auto p = GswParams::make(6, 64);
    auto kp = keygen(p, 3);
    Ciphertext zero{BitMatrix(p.N, p.N), p.id()};
    CHECK(decrypt(kp.sk, p, zero) == 0);
    Ciphertext wrong{BitMatrix(10, 10), p.id()};
    CHECK_THROWS_AS(decrypt(kp.sk, p, wrong), ShapeError);
}

TEST_CASE("leaky ciphertexts still decrypt") {
    auto p = GswParams::leaky(8);
    auto kp = keygen(p, 4);
    for (std::uint64_t s = 0; s < 20; ++s)
        for (int mu : {0, 1}) CHECK(decrypt(kp.sk, p, encrypt(kp.pk, mu, s)) == mu);
}

TEST_CASE("generate_dataset balance and determinism") {
    auto p = GswParams::make(3, 32);
    auto ds = generate_dataset(p, 500, 9);
    REQUIRE(ds.samples.size() == 1000);
    std::size_t ones = 0;
    for (const auto& s : ds.samples) ones += static_cast<std::size_t>(s.label);
    CHECK(ones == 500);
    CHECK(generate_dataset(p, 1, 9).samples.size() == 2);

    auto a = generate_dataset(p, 20, 9, 1);
    auto b = generate_dataset(p, 20, 9, 4);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].ct == b.samples[i].ct);
        CHECK(a.samples[i].label == b.samples[i].label);
        CHECK(decrypt(a.keys.sk, p, a.samples[i].ct) == a.samples[i].label);
    }
    CHECK_THROWS_AS(generate_dataset(p, 0, 9), DataError);
}
