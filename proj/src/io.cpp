#include "sgreen/io.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sgreen {

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void save_model(const MlpNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out << "{\n";
    out << "  \"format_version\": 1,\n";
    out << "  \"input_dim\": " << net.input_dim << ",\n";
    out << "  \"depth\": " << net.depth << ",\n";
    out << "  \"width\": " << net.width << ",\n";
    out << "  \"activation\": \"tanh\",\n";
    out << "  \"layers\": [\n";
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const auto& w = net.weights[l];
        out << "    {\"rows\": " << w.rows() << ", \"cols\": " << w.cols() << ",\n";
        out << "     \"W\": [";
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols(); ++j) {
                if (i + j > 0) out << ", ";
                out << fmt17(w(i, j));
            }
        out << "],\n     \"b\": [";
        const auto& b = net.biases[l];
        for (int i = 0; i < b.size(); ++i) {
            if (i > 0) out << ", ";
            out << fmt17(b(i));
        }
        out << "]}" << (l + 1 < net.weights.size() ? "," : "") << "\n";
    }
    out << "  ]\n}\n";
    if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

MlpNetwork load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    if (doc.at("format_version").get<int>() != 1)
        throw std::runtime_error("load_model: unsupported format version");
    if (doc.at("activation").get<std::string>() != "tanh")
        throw std::runtime_error("load_model: unsupported activation");

    MlpNetwork net;
    net.input_dim = doc.at("input_dim").get<int>();
    net.depth = doc.at("depth").get<int>();
    net.width = doc.at("width").get<int>();
    for (const auto& layer : doc.at("layers")) {
        const int rows = layer.at("rows").get<int>();
        const int cols = layer.at("cols").get<int>();
        const auto& wvals = layer.at("W");
        const auto& bvals = layer.at("b");
        if (static_cast<int>(wvals.size()) != rows * cols ||
            static_cast<int>(bvals.size()) != rows)
            throw std::runtime_error("load_model: layer size mismatch");
        Eigen::MatrixXd w(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) w(i, j) = wvals[i * cols + j].get<double>();
        Eigen::VectorXd b(rows);
        for (int i = 0; i < rows; ++i) b(i) = bvals[i].get<double>();
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    if (static_cast<int>(net.weights.size()) != net.depth + 1)
        throw std::runtime_error("load_model: layer count mismatch");
    return net;
}

void save_surrogate(const GreenSurrogate& surrogate, const std::string& path) {
    save_model(surrogate.net, path);
    nlohmann::json meta;
    meta["d"] = surrogate.dim;
    meta["kind"] = surrogate.kind.to_string();
    if (surrogate.kind.type == AugmentedKind::Type::Power)
        meta["exponent"] = surrogate.kind.exponent;
    meta["domain"] = surrogate.domain == DomainKind::Interval ? "interval" : "disc";
    std::ofstream out(path + ".meta");
    if (!out) throw std::runtime_error("save_surrogate: cannot open " + path + ".meta");
    out << meta.dump(2) << "\n";
}

GreenSurrogate load_surrogate(const std::string& path) {
    GreenSurrogate s;
    s.net = load_model(path);
    std::ifstream in(path + ".meta");
    if (!in) throw std::runtime_error("load_surrogate: missing sidecar " + path + ".meta");
    nlohmann::json meta = nlohmann::json::parse(in);
    s.dim = meta.at("d").get<int>();
    s.kind = AugmentedKind::from_string(meta.at("kind").get<std::string>(),
                                        meta.value("exponent", 0.0));
    s.domain = meta.at("domain").get<std::string>() == "interval" ? DomainKind::Interval
                                                                  : DomainKind::UnitDisc;
    if (s.net.input_dim != 2 * s.dim + 1)
        throw std::runtime_error("load_surrogate: model input_dim inconsistent with d");
    return s;
}

struct CsvWriter::Impl {
    std::ofstream out;
    std::size_t n_cols = 0;
};

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : impl_(new Impl) {
    impl_->out.open(path);
    if (!impl_->out) throw std::runtime_error("CsvWriter: cannot open " + path);
    impl_->n_cols = columns.size();
    for (std::size_t i = 0; i < columns.size(); ++i)
        impl_->out << columns[i] << (i + 1 < columns.size() ? "," : "");
    impl_->out << "\n";
}

CsvWriter::~CsvWriter() {
    close();
    delete impl_;
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != impl_->n_cols)
        throw std::invalid_argument("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
        impl_->out << fmt17(values[i]) << (i + 1 < values.size() ? "," : "");
    impl_->out << "\n";
}

void CsvWriter::close() {
    if (impl_->out.is_open()) impl_->out.close();
}

std::vector<std::vector<double>> read_csv(const std::string& path,
                                          std::vector<std::string>* columns) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
    if (columns) {
        columns->clear();
        std::stringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) columns->push_back(cell);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

void export_coordinate(const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_coordinate: cannot open " + path);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            out << i << " " << j << " " << fmt17(m(i, j)) << "\n";
}

void export_coordinate(const Eigen::SparseMatrix<double>& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_coordinate: cannot open " + path);
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            out << it.row() << " " << it.col() << " " << fmt17(it.value()) << "\n";
}

namespace {

// Compact SHA-256, enough to fingerprint model/config files in manifests.
class Sha256 {
public:
    Sha256() { reset(); }

    void update(const std::uint8_t* data, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            buffer_[buffer_len_++] = data[i];
            if (buffer_len_ == 64) {
                process(buffer_.data());
                total_ += 64;
                buffer_len_ = 0;
            }
        }
    }

    std::string hex_digest() {
        const std::uint64_t bits = (total_ + buffer_len_) * 8;
        std::uint8_t pad = 0x80;
        update(&pad, 1);
        const std::uint8_t zero = 0;
        while (buffer_len_ != 56) update(&zero, 1);
        for (int i = 7; i >= 0; --i) {
            const std::uint8_t byte = static_cast<std::uint8_t>(bits >> (8 * i));
            update(&byte, 1);
        }
        char out[65];
        for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h_[i]);
        return std::string(out, 64);
    }

private:
    void reset() {
        static constexpr std::array<std::uint32_t, 8> init = {
            0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
            0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
        h_ = init;
        total_ = 0;
        buffer_len_ = 0;
    }

    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void process(const std::uint8_t* chunk) {
        static constexpr std::array<std::uint32_t, 64> k = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
            0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
            0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
            0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
            0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
            0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
            0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
            0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (chunk[4 * i] << 24) | (chunk[4 * i + 1] << 16) | (chunk[4 * i + 2] << 8) |
                   chunk[4 * i + 3];
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto [a, b, c, d, e, f, g, h] = std::tuple(h_[0], h_[1], h_[2], h_[3], h_[4], h_[5],
                                                   h_[6], h_[7]);
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = h + s1 + ch + k[i] + w[i];
            const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = s0 + maj;
            h = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h_[0] += a; h_[1] += b; h_[2] += c; h_[3] += d;
        h_[4] += e; h_[5] += f; h_[6] += g; h_[7] += h;
    }

    std::array<std::uint32_t, 8> h_;
    std::array<std::uint8_t, 64> buffer_;
    std::uint64_t total_ = 0;
    std::size_t buffer_len_ = 0;
};

}  // namespace

std::string file_content_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("file_content_hash: cannot open " + path);
    Sha256 sha;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        sha.update(reinterpret_cast<const std::uint8_t*>(buf), static_cast<std::size_t>(in.gcount()));
    return sha.hex_digest();
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json doc;
    doc["command"] = manifest.command;
    doc["config_digest"] = manifest.config_digest;
    doc["seed"] = manifest.seed;
    doc["started"] = manifest.started;
    doc["finished"] = manifest.finished;
    doc["outputs"] = manifest.outputs;
    doc["model_hash"] = manifest.model_hash;
    for (const auto& [key, value] : manifest.extra) doc[key] = value;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace sgreen
