#pragma once

#include <string>
#include <vector>

#include "sgreen/green_model.hpp"
#include "sgreen/net.hpp"

namespace sgreen {

/// Model file: a JSON text document
///   {format_version:1, input_dim, depth, width, activation:"tanh",
///    layers:[{rows, cols, W:[row-major...], b:[...]}]}
/// with every number printed to 17 significant digits so the round trip is
/// value-exact in double precision.
void save_model(const MlpNetwork& net, const std::string& path);
MlpNetwork load_model(const std::string& path);

/// Surrogate = model file plus a sidecar header `<path>.meta` recording
/// {d, kind, domain}.
void save_surrogate(const GreenSurrogate& surrogate, const std::string& path);
GreenSurrogate load_surrogate(const std::string& path);

/// CSV with a header row, '.' decimal separator, 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    ~CsvWriter();
    void row(const std::vector<double>& values);
    void close();

private:
    struct Impl;
    Impl* impl_;
};

std::vector<std::vector<double>> read_csv(const std::string& path,
                                          std::vector<std::string>* columns = nullptr);

/// Coordinate text export: one "row col value" line per entry,
/// 17 significant digits.
void export_coordinate(const Eigen::MatrixXd& m, const std::string& path);
void export_coordinate(const Eigen::SparseMatrix<double>& m, const std::string& path);

/// SHA-256 hex digest of a file's content.
std::string file_content_hash(const std::string& path);

/// Run metadata written next to every artifact-producing command.
struct RunManifest {
    std::string command;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs;
    std::string model_hash;
    std::vector<std::pair<std::string, std::string>> extra;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

std::string timestamp_utc();

}  // namespace sgreen
