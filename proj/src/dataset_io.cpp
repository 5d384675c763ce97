#include "tdac/dataset_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "tdac/errors.hpp"

namespace tdac {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'T', 'D', 'A', 'C'};
constexpr std::size_t kHeaderSize = 4 + 1 + 3 * 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
    return v;
}

void need(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t len, const char* what) {
    if (offset + len > bytes.size())
        throw FormatError(fmt::format("tdac: truncated at byte offset {} while reading {} ({} bytes needed, {} available)",
                                      offset, what, len, bytes.size() - std::min(offset, bytes.size())));
}

}  // namespace

BitDataset to_bit_dataset(const GeneratedDataset& generated, const GswParams& params) {
    BitDataset ds;
    ds.rows = static_cast<std::uint32_t>(params.N);
    ds.cols = static_cast<std::uint32_t>(params.N);
    ds.samples.reserve(generated.samples.size());
    for (const auto& s : generated.samples) ds.samples.push_back({s.ct.bits, static_cast<std::uint8_t>(s.label)});
    return ds;
}

std::vector<std::uint8_t> encode_tdac(const BitDataset& ds) {
    const std::size_t row_bytes = (ds.cols + 7) / 8;
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + ds.samples.size() * (1 + ds.rows * row_bytes));
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    out.push_back(kTdacVersion);
    put_u32(out, ds.rows);
    put_u32(out, ds.cols);
    put_u32(out, static_cast<std::uint32_t>(ds.samples.size()));
    for (const auto& s : ds.samples) {
        if (s.bits.rows != ds.rows || s.bits.cols != ds.cols)
            throw ShapeError(fmt::format("tdac: sample is {}x{}, dataset is {}x{}", s.bits.rows, s.bits.cols, ds.rows,
                                         ds.cols));
        out.push_back(s.label);
        for (std::size_t r = 0; r < ds.rows; ++r) {
            for (std::size_t b = 0; b < row_bytes; ++b) {
                std::uint8_t byte = 0;
                for (std::size_t k = 0; k < 8; ++k) {
                    std::size_t c = 8 * b + k;
                    if (c < ds.cols && s.bits.at(r, c)) byte |= static_cast<std::uint8_t>(0x80u >> k);
                }
                out.push_back(byte);
            }
        }
    }
    return out;
}

BitDataset decode_tdac(std::span<const std::uint8_t> bytes) {
    need(bytes, 0, 4, "magic");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw FormatError("tdac: bad magic at byte offset 0");
    need(bytes, 4, 1, "version");
    if (bytes[4] != kTdacVersion) throw FormatError(fmt::format("tdac: unsupported version {} at byte offset 4", bytes[4]));
    need(bytes, 5, 12, "header");
    BitDataset ds;
    ds.rows = get_u32(bytes, 5);
    ds.cols = get_u32(bytes, 9);
    const std::uint32_t count = get_u32(bytes, 13);
    const std::size_t row_bytes = (static_cast<std::size_t>(ds.cols) + 7) / 8;
    const std::size_t sample_bytes = 1 + ds.rows * row_bytes;

    std::size_t offset = kHeaderSize;
    ds.samples.reserve(std::min<std::size_t>(count, bytes.size() / std::max<std::size_t>(sample_bytes, 1) + 1));
    for (std::uint32_t i = 0; i < count; ++i) {
        need(bytes, offset, sample_bytes, fmt::format("sample {}", i).c_str());
        LabeledBits s;
        s.label = bytes[offset];
        if (s.label > 1) throw FormatError(fmt::format("tdac: label {} at byte offset {} is not 0/1", s.label, offset));
        ++offset;
        s.bits = BitMatrix(ds.rows, ds.cols);
        for (std::size_t r = 0; r < ds.rows; ++r) {
            for (std::size_t c = 0; c < ds.cols; ++c) {
                std::uint8_t byte = bytes[offset + r * row_bytes + c / 8];
                s.bits.at(r, c) = (byte >> (7 - c % 8)) & 1u;
            }
        }
        offset += ds.rows * row_bytes;
        ds.samples.push_back(std::move(s));
    }
    if (offset != bytes.size())
        throw FormatError(fmt::format("tdac: {} trailing bytes at byte offset {}", bytes.size() - offset, offset));
    return ds;
}

void write_tdac(const std::filesystem::path& path, const BitDataset& ds) {
    auto bytes = encode_tdac(ds);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

BitDataset read_tdac(const std::filesystem::path& path) { return decode_tdac(read_bytes(path)); }

nlohmann::ordered_json make_manifest(const GswParams& params, std::uint64_t seed, std::size_t count_per_class,
                             const BitDataset& ds) {
    std::size_t ones = 0;
    for (const auto& s : ds.samples) ones += s.label;
    return nlohmann::ordered_json{
        {"format", "TDAC"},
        {"version", kTdacVersion},
        {"params",
         {{"n", params.n},
          {"q", params.q},
          {"ell", params.ell},
          {"m", params.m},
          {"N", params.N},
          {"error_bound", params.error_bound},
          {"leaky", params.is_leaky()}}},
        {"seed", seed},
        {"count_per_class", count_per_class},
        {"counts", {{"0", ds.samples.size() - ones}, {"1", ones}}},
        {"rows", ds.rows},
        {"cols", ds.cols},
        {"samples", ds.samples.size()},
    };
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path& path) {
    auto bytes = read_bytes(path);
    return {bytes.begin(), bytes.end()};
}

}  // namespace tdac
