#include "vcgmm/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vcgmm/errors.hpp"

namespace vcgmm {

namespace {

constexpr char kMagic[8] = {'V', 'C', 'G', 'M', 'M', '0', '0', '1'};

bool parse_field(std::string_view field, double& out) {
    // Trim surrounding whitespace; from_chars is locale-independent.
    std::size_t begin = 0, end = field.size();
    while (begin < end && (field[begin] == ' ' || field[begin] == '\t')) ++begin;
    while (end > begin && (field[end - 1] == ' ' || field[end - 1] == '\t' ||
                           field[end - 1] == '\r'))
        --end;
    if (begin == end) return false;
    if (field[begin] == '+' && end - begin > 1) ++begin;  // from_chars rejects a leading plus
    const char* first = field.data() + begin;
    const char* last = field.data() + end;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

std::uint64_t read_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void write_u64_le(std::uint64_t v, std::ostream& out) {
    std::array<char, 8> buf;
    for (int i = 0; i < 8; ++i) buf[static_cast<std::size_t>(i)] = static_cast<char>(v >> (8 * i));
    out.write(buf.data(), 8);
}

}  // namespace

DataMatrix load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::vector<double> values;
    std::size_t dim = 0;
    std::size_t data_rows = 0;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_row = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_line(line);

        if (first_content_row) {
            // Header detection: a first row with any non-numeric field is
            // treated as column names and skipped.
            double probe;
            bool numeric = true;
            for (const auto f : fields)
                if (!parse_field(f, probe)) numeric = false;
            first_content_row = false;
            if (!numeric) continue;
        }

        if (dim == 0) dim = fields.size();
        if (fields.size() != dim)
            throw DataError(path + ": ragged row at line " + std::to_string(line_no) + " (" +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(dim) + ")");
        for (std::size_t col = 0; col < fields.size(); ++col) {
            double v;
            if (!parse_field(fields[col], v))
                throw DataError(path + ": non-numeric value at line " + std::to_string(line_no) +
                                ", column " + std::to_string(col + 1));
            if (!std::isfinite(v))
                throw DataError(path + ": non-finite value at line " + std::to_string(line_no) +
                                ", column " + std::to_string(col + 1));
            values.push_back(v);
        }
        ++data_rows;
    }
    if (data_rows == 0) throw DataError(path + ": no data rows");
    return DataMatrix(data_rows, dim, std::move(values));
}

void write_csv(const DataMatrix& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    std::array<char, 64> buf;
    for (std::size_t n = 0; n < data.n_points(); ++n) {
        const auto row = data.row(n);
        for (std::size_t d = 0; d < row.size(); ++d) {
            const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), row[d]);
            if (d > 0) out << ',';
            out.write(buf.data(), ptr - buf.data());
        }
        out << '\n';
    }
}

DataMatrix load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    in.seekg(0, std::ios::end);
    const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0, std::ios::beg);

    if (file_size < 24)
        throw DataError(path + ": file too short for header (" + std::to_string(file_size) +
                        " bytes, need 24)");
    std::array<unsigned char, 24> header;
    in.read(reinterpret_cast<char*>(header.data()), 24);
    if (std::memcmp(header.data(), kMagic, 8) != 0)
        throw DataError(path + ": bad magic at byte offset 0 (expected VCGMM001)");

    const std::uint64_t n = read_u64_le(header.data() + 8);
    const std::uint64_t dim = read_u64_le(header.data() + 16);
    if (n < 1 || dim < 1) throw DataError(path + ": invalid shape in header");
    const std::uint64_t expected = 24 + n * dim * 8;
    if (file_size != expected)
        throw DataError(path + ": payload size mismatch (expected " + std::to_string(expected) +
                        " bytes, got " + std::to_string(file_size) + ")");

    std::vector<double> values(n * dim);
    std::vector<unsigned char> raw(n * dim * 8);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in)
        throw DataError(path + ": short read in payload at byte offset " +
                        std::to_string(24 + in.gcount()));
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = std::bit_cast<double>(read_u64_le(raw.data() + i * 8));
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw DataError(path + ": non-finite value at row " + std::to_string(i / dim) +
                            ", column " + std::to_string(i % dim + 1));
    return DataMatrix(n, dim, std::move(values));
}

void write_binary(const DataMatrix& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out.write(kMagic, 8);
    write_u64_le(data.n_points(), out);
    write_u64_le(data.dim(), out);
    for (double v : data.values()) write_u64_le(std::bit_cast<std::uint64_t>(v), out);
    if (!out) throw DataError("write failed: " + path);
}

DataMatrix load_matrix(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return load_csv(path);
    return load_binary(path);
}

void save_model(const GmmParams& params, const std::string& path) {
    nlohmann::json j;
    j["dim"] = params.dim();
    j["clusters"] = params.n_clusters();
    j["variance"] = params.variance;
    auto means = nlohmann::json::array();
    for (std::size_t c = 0; c < params.n_clusters(); ++c) {
        const auto row = params.mean(c);
        means.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["means"] = std::move(means);
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

GmmParams load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid model JSON: " + e.what());
    }
    try {
        const std::size_t dim = j.at("dim").get<std::size_t>();
        const std::size_t n_clusters = j.at("clusters").get<std::size_t>();
        const double variance = j.at("variance").get<double>();
        const auto& means = j.at("means");
        if (means.size() != n_clusters)
            throw DataError(path + ": mean count does not match clusters");
        std::vector<double> values;
        values.reserve(n_clusters * dim);
        for (const auto& row : means) {
            if (row.size() != dim) throw DataError(path + ": mean row with wrong dimension");
            for (const auto& v : row) values.push_back(v.get<double>());
        }
        GmmParams params{DataMatrix(n_clusters, dim, std::move(values)), variance};
        if (!(params.variance > 0.0)) throw DataError(path + ": variance must be positive");
        return params;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed model file: " + e.what());
    }
}

void save_weights(const std::vector<double>& weights, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    std::array<char, 64> buf;
    for (double w : weights) {
        const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), w);
        out.write(buf.data(), ptr - buf.data());
        out << '\n';
    }
}

std::vector<double> load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<double> weights;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        double v;
        if (!parse_field(line, v) || !std::isfinite(v))
            throw DataError(path + ": invalid weight at line " + std::to_string(line_no));
        weights.push_back(v);
    }
    if (weights.empty()) throw DataError(path + ": no weights");
    return weights;
}

}  // namespace vcgmm
