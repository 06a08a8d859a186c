#include "styleobf/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace styleobf {

namespace {

const char kMagic[8] = {'S', 'O', 'B', 'F', 'B', 'I', 'N', '\0'};

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_str(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

std::string read_str(std::istream& is) {
    std::uint64_t n = read_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return s;
}

}  // namespace

void save_bundle(const std::string& path, const TensorBundle& bundle) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_bundle: cannot open " + path);
    f.write(kMagic, sizeof kMagic);
    write_u32(f, kBundleVersion);
    write_str(f, bundle.config_json);
    write_u64(f, bundle.tensors.size());
    for (const auto& [name, m] : bundle.tensors) {
        write_str(f, name);
        write_u64(f, static_cast<std::uint64_t>(m.rows()));
        write_u64(f, static_cast<std::uint64_t>(m.cols()));
        f.write(reinterpret_cast<const char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double) * m.size()));
    }
    if (!f) throw std::runtime_error("save_bundle: write failed for " + path);
}

TensorBundle load_bundle(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_bundle: cannot open " + path);
    char magic[8];
    f.read(magic, sizeof magic);
    if (!f || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("load_bundle: bad magic bytes in " + path);
    std::uint32_t ver = read_u32(f);
    if (ver != kBundleVersion)
        throw std::runtime_error("load_bundle: unsupported format version " +
                                 std::to_string(ver) + " in " + path);
    TensorBundle b;
    b.config_json = read_str(f);
    std::uint64_t count = read_u64(f);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string name = read_str(f);
        std::uint64_t rows = read_u64(f), cols = read_u64(f);
        Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        f.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(sizeof(double) * m.size()));
        if (!f) throw std::runtime_error("load_bundle: truncated tensor '" + name + "'");
        b.tensors.emplace(std::move(name), std::move(m));
    }
    return b;
}

}  // namespace styleobf
