#pragma once

// TDAC binary dataset container:
//   "TDAC" | 0x01 | u32 rows | u32 cols | u32 count      (little-endian)
//   count x { u8 label | rows x ceil(cols / 8) bytes }   (MSB-first bits)

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdac/gsw.hpp"

namespace tdac {

struct LabeledBits {
    BitMatrix bits;
    std::uint8_t label = 0;

    friend bool operator==(const LabeledBits&, const LabeledBits&) = default;
};

struct BitDataset {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<LabeledBits> samples;

    friend bool operator==(const BitDataset&, const BitDataset&) = default;
};

inline constexpr std::uint8_t kTdacVersion = 0x01;

BitDataset to_bit_dataset(const GeneratedDataset& generated, const GswParams& params);

std::vector<std::uint8_t> encode_tdac(const BitDataset& ds);
// Throws FormatError naming the byte offset of the first problem.
BitDataset decode_tdac(std::span<const std::uint8_t> bytes);

void write_tdac(const std::filesystem::path& path, const BitDataset& ds);
BitDataset read_tdac(const std::filesystem::path& path);

nlohmann::ordered_json make_manifest(const GswParams& params, std::uint64_t seed, std::size_t count_per_class,
                             const BitDataset& ds);

// Shared helpers for deterministic text artifacts.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

}  // namespace tdac
