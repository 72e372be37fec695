#include "relprop/model_io.hpp"

#include <unistd.h>

#include <atomic>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "relprop/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization code assumes a little-endian host");

namespace relprop {

namespace {

constexpr std::uint8_t kTagConv2d = 1;
constexpr std::uint8_t kTagMaxPool2d = 2;
constexpr std::uint8_t kTagRelu = 3;
constexpr std::uint8_t kTagFlatten = 4;
constexpr std::uint8_t kTagDense = 5;
constexpr std::uint8_t kTagSoftmax = 6;

void put_u8(std::ostream& out, std::uint8_t v) {
    out.put(static_cast<char>(v));
}

void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f32(std::ostream& out, float v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint8_t get_u8(std::istream& in) {
    char c;
    if (!in.get(c)) throw ParseError("unexpected end of file");
    return static_cast<std::uint8_t>(c);
}

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw ParseError("unexpected end of file");
    return v;
}

float get_f32(std::istream& in) {
    float v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw ParseError("unexpected end of file");
    return v;
}

void expect_magic(std::istream& in, const char* magic) {
    char buf[4];
    if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
        throw ParseError(std::string("bad magic, expected ") + magic);
    }
}

template <typename T>
void write_tensor(std::ostream& out, const Tensor<T>& t) {
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (const T& v : t.data()) put_f32(out, static_cast<float>(v));
}

template <typename T>
Tensor<T> read_tensor(std::istream& in) {
    const std::uint32_t rank = get_u32(in);
    if (rank > 8) throw ParseError("tensor rank " + std::to_string(rank) + " out of range");
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
        d = get_u32(in);
        if (d == 0) throw ParseError("zero tensor dimension");
        count *= d;
    }
    std::vector<T> data(count);
    for (auto& v : data) v = static_cast<T>(get_f32(in));
    return Tensor<T>(std::move(shape), std::move(data));
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

}  // namespace

void atomic_write_file(const std::filesystem::path& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const fs::path tmp = dir / (path.filename().string() + ".tmp." +
                                std::to_string(static_cast<long>(::getpid())) + "." +
                                std::to_string(counter.fetch_add(1)));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " +
                      ec.message());
    }
}

template <typename T>
void write_model(const Network<T>& net, std::ostream& out) {
    out.write("NNM1", 4);
    put_u32(out, static_cast<std::uint32_t>(net.input_shape().h));
    put_u32(out, static_cast<std::uint32_t>(net.input_shape().w));
    put_u32(out, static_cast<std::uint32_t>(net.input_shape().c));
    put_u32(out, static_cast<std::uint32_t>(net.layers().size()));

    for (const LayerSpec& spec : net.layers()) {
        if (const auto* conv = std::get_if<Conv2dSpec>(&spec)) {
            put_u8(out, kTagConv2d);
            put_u32(out, static_cast<std::uint32_t>(conv->filter_h));
            put_u32(out, static_cast<std::uint32_t>(conv->filter_w));
            put_u32(out, static_cast<std::uint32_t>(conv->filters));
            put_u32(out, static_cast<std::uint32_t>(conv->stride));
            put_u32(out, conv->padding == Padding::SameZero ? 0u : 1u);
        } else if (std::holds_alternative<MaxPool2dSpec>(spec)) {
            put_u8(out, kTagMaxPool2d);
        } else if (std::holds_alternative<ReluSpec>(spec)) {
            put_u8(out, kTagRelu);
        } else if (std::holds_alternative<FlattenSpec>(spec)) {
            put_u8(out, kTagFlatten);
        } else if (const auto* dense = std::get_if<DenseSpec>(&spec)) {
            put_u8(out, kTagDense);
            put_u32(out, static_cast<std::uint32_t>(dense->units));
        } else {
            put_u8(out, kTagSoftmax);
        }
    }

    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        const auto& p = net.params(k);
        if (!p.has_params()) continue;
        write_tensor(out, p.weights);
        // a stripped bias is serialized as explicit zeros; same forward result
        if (p.bias.empty()) {
            const std::size_t units = p.weights.dim(p.weights.rank() - 1);
            write_tensor(out, Tensor<T>({units}));
        } else {
            write_tensor(out, p.bias);
        }
    }
}

template <typename T>
Network<T> read_model(std::istream& in) {
    expect_magic(in, "NNM1");
    Shape3 input_shape;
    input_shape.h = get_u32(in);
    input_shape.w = get_u32(in);
    input_shape.c = get_u32(in);
    const std::uint32_t layer_count = get_u32(in);
    if (layer_count == 0 || layer_count > 1024) {
        throw ParseError("layer count " + std::to_string(layer_count) + " out of range");
    }

    std::vector<LayerSpec> layers;
    layers.reserve(layer_count);
    for (std::uint32_t k = 0; k < layer_count; ++k) {
        switch (get_u8(in)) {
            case kTagConv2d: {
                Conv2dSpec conv;
                conv.filter_h = get_u32(in);
                conv.filter_w = get_u32(in);
                conv.filters = get_u32(in);
                conv.stride = get_u32(in);
                conv.padding = get_u32(in) == 0 ? Padding::SameZero : Padding::Valid;
                layers.push_back(conv);
                break;
            }
            case kTagMaxPool2d:
                layers.push_back(MaxPool2dSpec{});
                break;
            case kTagRelu:
                layers.push_back(ReluSpec{});
                break;
            case kTagFlatten:
                layers.push_back(FlattenSpec{});
                break;
            case kTagDense:
                layers.push_back(DenseSpec{get_u32(in)});
                break;
            case kTagSoftmax:
                layers.push_back(SoftmaxSpec{});
                break;
            default:
                throw ParseError("unknown layer kind tag");
        }
    }

    Network<T> net(input_shape, std::move(layers));
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        if (!net.params(k).has_params()) continue;
        Tensor<T> weights = read_tensor<T>(in);
        Tensor<T> bias = read_tensor<T>(in);
        if (weights.shape() != net.params(k).weights.shape()) {
            throw ParseError("layer " + std::to_string(k) + " weight shape " +
                             shape_string(weights.shape()) + " does not match spec shape " +
                             shape_string(net.params(k).weights.shape()));
        }
        if (bias.shape() != net.params(k).bias.shape()) {
            throw ParseError("layer " + std::to_string(k) + " bias shape mismatch");
        }
        net.params(k).weights = std::move(weights);
        net.params(k).bias = std::move(bias);
    }
    return net;
}

template <typename T>
void save_model(const Network<T>& net, const std::filesystem::path& path) {
    std::ostringstream buf(std::ios::binary);
    write_model(net, buf);
    atomic_write_file(path, buf.str());
}

template <typename T>
Network<T> load_model(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    try {
        return read_model<T>(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

template <typename T>
void save_relevance_map(const RelevanceMap<T>& map, const std::filesystem::path& path) {
    std::ostringstream out(std::ios::binary);
    out.write("RLV1", 4);
    write_tensor(out, map.values);
    put_f32(out, static_cast<float>(map.start_score));
    put_u32(out, static_cast<std::uint32_t>(map.target_class));
    atomic_write_file(path, out.str());
}

template <typename T>
RelevanceMap<T> load_relevance_map(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    try {
        expect_magic(in, "RLV1");
        RelevanceMap<T> map;
        map.values = read_tensor<T>(in);
        map.start_score = static_cast<T>(get_f32(in));
        map.target_class = get_u32(in);
        return map;
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

template void save_model(const Network<float>&, const std::filesystem::path&);
template void save_model(const Network<double>&, const std::filesystem::path&);
template Network<float> load_model(const std::filesystem::path&);
template Network<double> load_model(const std::filesystem::path&);
template void write_model(const Network<float>&, std::ostream&);
template void write_model(const Network<double>&, std::ostream&);
template Network<float> read_model(std::istream&);
template Network<double> read_model(std::istream&);
template void save_relevance_map(const RelevanceMap<float>&, const std::filesystem::path&);
template void save_relevance_map(const RelevanceMap<double>&, const std::filesystem::path&);
template RelevanceMap<float> load_relevance_map(const std::filesystem::path&);
template RelevanceMap<double> load_relevance_map(const std::filesystem::path&);

}  // namespace relprop
