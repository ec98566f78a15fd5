#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "testutil.hpp"
#include "vcgmm/io.hpp"

using namespace vcgmm;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "vcgmm_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("load_csv") {
    SUBCASE("plain two-point file") {
        const auto path = temp_file("plain.csv");
        write_text(path, "0,0\n3,4\n");
        const auto data = load_csv(path.string());
        CHECK(data.n_points() == 2);
        CHECK(data.dim() == 2);
        CHECK(data.row(1)[0] == 3.0);
        CHECK(data.row(1)[1] == 4.0);
    }
    SUBCASE("header row is auto-detected and skipped") {
        const auto path = temp_file("header.csv");
        write_text(path, "x,y\n1.5,2.5\n-1,0\n");
        const auto data = load_csv(path.string());
        CHECK(data.n_points() == 2);
        CHECK(data.row(0)[0] == 1.5);
    }
    SUBCASE("ragged rows are rejected with the line number") {
        const auto path = temp_file("ragged.csv");
        write_text(path, "1,2\n3\n");
        CHECK_THROWS_WITH_AS((void)load_csv(path.string()),
                             doctest::Contains("line 2"), DataError);
    }
    SUBCASE("non-numeric cells are rejected with row and column") {
        const auto path = temp_file("nonnum.csv");
        write_text(path, "1,2\n3,oops\n");
        CHECK_THROWS_WITH_AS((void)load_csv(path.string()),
                             doctest::Contains("column 2"), DataError);
    }
    SUBCASE("non-finite values are rejected") {
        const auto path = temp_file("inf.csv");
        write_text(path, "1,2\ninf,4\n");
        CHECK_THROWS_AS((void)load_csv(path.string()), DataError);
    }
    SUBCASE("empty file is rejected") {
        const auto path = temp_file("empty.csv");
        write_text(path, "");
        CHECK_THROWS_AS((void)load_csv(path.string()), DataError);
    }
    SUBCASE("missing file is a data error") {
        CHECK_THROWS_AS((void)load_csv("/nonexistent/file.csv"), DataError);
    }
}

TEST_CASE("csv round-trip preserves values exactly") {
    const auto data = testutil::random_data(50, 3, 1000);
    const auto path = temp_file("roundtrip.csv");
    write_csv(data, path.string());
    const auto loaded = load_csv(path.string());
    CHECK(loaded.values() == data.values());
}

TEST_CASE("binary format") {
    SUBCASE("minimal 1x1 file") {
        const auto path = temp_file("minimal.bin");
        write_binary(DataMatrix(1, 1, {0.0}), path.string());
        const auto data = load_binary(path.string());
        CHECK(data.n_points() == 1);
        CHECK(data.dim() == 1);
        CHECK(data.row(0)[0] == 0.0);
    }
    SUBCASE("round-trip is bit-faithful") {
        const auto data = testutil::random_data(40, 4, 1001);
        const auto path = temp_file("bits.bin");
        write_binary(data, path.string());
        CHECK(load_binary(path.string()).values() == data.values());
    }
    SUBCASE("csv to binary conversion equals the csv load") {
        const auto data = testutil::random_data(30, 2, 1002);
        const auto csv_path = temp_file("conv.csv");
        const auto bin_path = temp_file("conv.bin");
        write_csv(data, csv_path.string());
        const auto from_csv = load_csv(csv_path.string());
        write_binary(from_csv, bin_path.string());
        CHECK(load_binary(bin_path.string()).values() == from_csv.values());
    }
    SUBCASE("truncated payload reports expected vs actual size") {
        const auto data = testutil::random_data(5, 2, 1003);
        const auto path = temp_file("trunc.bin");
        write_binary(data, path.string());
        fs::resize_file(path, fs::file_size(path) - 8);
        CHECK_THROWS_WITH_AS((void)load_binary(path.string()),
                             doctest::Contains("expected 104 bytes, got 96"), DataError);
    }
    SUBCASE("bad magic names the offset") {
        const auto path = temp_file("magic.bin");
        write_text(path, "NOTMAGIC________________________");
        CHECK_THROWS_WITH_AS((void)load_binary(path.string()),
                             doctest::Contains("byte offset 0"), DataError);
    }
}

TEST_CASE("load_matrix dispatches on the extension") {
    const auto data = testutil::random_data(10, 2, 1004);
    const auto csv_path = temp_file("dispatch.csv");
    const auto bin_path = temp_file("dispatch.dat");
    write_csv(data, csv_path.string());
    write_binary(data, bin_path.string());
    CHECK(load_matrix(csv_path.string()).values() == data.values());
    CHECK(load_matrix(bin_path.string()).values() == data.values());
}

TEST_CASE("model save/load round trip") {
    GmmParams params{testutil::random_data(3, 4, 1005), 0.37};
    const auto path = temp_file("model.json");
    save_model(params, path.string());
    const auto loaded = load_model(path.string());
    CHECK(loaded.n_clusters() == 3);
    CHECK(loaded.dim() == 4);
    CHECK(loaded.variance == 0.37);
    CHECK(loaded.means.values() == params.means.values());

    write_text(path, "{\"broken\": true}");
    CHECK_THROWS_AS((void)load_model(path.string()), DataError);
}

TEST_CASE("weights save/load round trip") {
    const std::vector<double> weights{1.0, 2.5, 0.125};
    const auto path = temp_file("weights.txt");
    save_weights(weights, path.string());
    CHECK(load_weights(path.string()) == weights);
}
