#include "qae/checkpoint.hpp"

#include "qae/errors.hpp"
#include "qae/io_util.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace qae {

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, std::span<const std::uint8_t>(
                                reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

namespace le {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::span<const std::uint8_t> Reader::take(std::size_t n) {
    if (remaining() < n) {
        throw FormatError(std::string(what_) + ": truncated at byte " + std::to_string(pos_) +
                          " (needed " + std::to_string(n) + " more)");
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
}

std::uint8_t Reader::u8() { return take(1)[0]; }

std::uint32_t Reader::u32() {
    auto b = take(4);
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

float Reader::f32() { return std::bit_cast<float>(u32()); }

} // namespace le

namespace {

constexpr char kMagic[4] = {'Q', 'A', 'E', '1'};
// Guards against absurd header values before any allocation.
constexpr std::uint32_t kMaxChannels = 1u << 16;
constexpr std::uint32_t kMaxKernel = 255;

} // namespace

std::vector<std::uint8_t> serialize(const QAEModel& model) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.push_back(kCheckpointVersion);
    out.push_back(static_cast<std::uint8_t>(model.kind()));
    le::put_u32(out, static_cast<std::uint32_t>(model.config().channels));
    le::put_u32(out, static_cast<std::uint32_t>(model.config().kernel));
    out.reserve(out.size() + 4 * model.count_params());
    for_each_group(model.params(), [&](std::span<const double> values) {
        for (double v : values) le::put_f32(out, static_cast<float>(v));
    });
    return out;
}

QAEModel deserialize(std::span<const std::uint8_t> bytes, const Activation& act) {
    le::Reader in(bytes, "checkpoint");
    auto magic = in.take(4);
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
        throw FormatError("checkpoint: bad magic (expected QAE1)");
    }
    const std::uint8_t version = in.u8();
    if (version != kCheckpointVersion) {
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    const std::uint8_t kind = in.u8();
    if (kind > 1) throw FormatError("checkpoint: unknown neuron kind byte " + std::to_string(kind));
    const std::uint32_t channels = in.u32();
    const std::uint32_t kernel = in.u32();
    if (channels == 0 || channels > kMaxChannels || kernel % 2 == 0 || kernel > kMaxKernel) {
        throw FormatError("checkpoint: invalid header (channels " + std::to_string(channels) +
                          ", kernel " + std::to_string(kernel) + ")");
    }

    QAEConfig cfg{channels, kernel, static_cast<NeuronKind>(kind), act};
    const std::size_t expected = count_params(cfg) * 4;
    if (in.remaining() != expected) {
        throw FormatError("checkpoint: payload is " + std::to_string(in.remaining()) +
                          " bytes, expected " + std::to_string(expected));
    }
    QAEModel model(cfg);
    for_each_group(model.params(), [&](std::span<double> values) {
        for (double& v : values) v = static_cast<double>(in.f32());
    });
    return model;
}

void save_checkpoint(const QAEModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, serialize(model));
}

QAEModel load_checkpoint(const std::filesystem::path& path, const Activation& act) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = read_file(path);
    } catch (const std::runtime_error& e) {
        throw FormatError(e.what());
    }
    return deserialize(bytes, act);
}

void round_to_float32(QAEModel& model) {
    for_each_group(model.params(), [](std::span<double> values) {
        for (double& v : values) v = static_cast<double>(static_cast<float>(v));
    });
}

} // namespace qae
