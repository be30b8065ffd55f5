#include "dynamo/field_io.hpp"

#include <cstdio>
#include <memory>
#include <vector>

#include "json.hpp"

#include "dynamo/errors.hpp"

namespace dynamo {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void save_field(const std::string& path, const SpectralVectorField& f, bool reality_flag) {
    nlohmann::json manifest = {
        {"format_version", 1},      {"N", f.truncation()},
        {"reality_flag", reality_flag}, {"layout", "lex_kx_ky_kz"},
        {"scalar", "f64le"},
    };
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) fail(Err::IoError, "cannot open '" + path + "' for writing");
    const std::string head = manifest.dump() + "\n";
    if (std::fwrite(head.data(), 1, head.size(), fp.get()) != head.size())
        fail(Err::IoError, "short write on '" + path + "'");

    const std::size_t m3 = f.modes_per_component();
    std::vector<double> row(6);
    auto c0 = f.component(0);
    auto c1 = f.component(1);
    auto c2 = f.component(2);
    for (std::size_t i = 0; i < m3; ++i) {
        row[0] = c0[i].real();
        row[1] = c0[i].imag();
        row[2] = c1[i].real();
        row[3] = c1[i].imag();
        row[4] = c2[i].real();
        row[5] = c2[i].imag();
        if (std::fwrite(row.data(), sizeof(double), 6, fp.get()) != 6)
            fail(Err::IoError, "short write on '" + path + "'");
    }
    if (std::fflush(fp.get()) != 0) fail(Err::IoError, "flush failed on '" + path + "'");
}

LoadedField load_field(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail(Err::IoError, "cannot open '" + path + "' for reading");

    std::string head;
    for (;;) {
        const int c = std::fgetc(fp.get());
        if (c == EOF) fail(Err::IoError, "missing manifest line in '" + path + "'");
        if (c == '\n') break;
        head.push_back(char(c));
        if (head.size() > 1 << 16) fail(Err::IoError, "manifest line too long in '" + path + "'");
    }

    nlohmann::json manifest = nlohmann::json::parse(head, nullptr, false);
    if (manifest.is_discarded()) fail(Err::IoError, "malformed manifest in '" + path + "'");
    FieldManifest m;
    try {
        m.format_version = manifest.at("format_version").get<int>();
        m.truncation = manifest.at("N").get<int>();
        m.reality_flag = manifest.at("reality_flag").get<bool>();
        m.layout = manifest.at("layout").get<std::string>();
        m.scalar = manifest.at("scalar").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(Err::IoError, "manifest missing fields in '" + path + "': " + e.what());
    }
    if (m.format_version != 1) fail(Err::IoError, "unsupported format_version in '" + path + "'");
    if (m.layout != "lex_kx_ky_kz" || m.scalar != "f64le")
        fail(Err::IoError, "unsupported layout/scalar in '" + path + "'");
    if (m.truncation < 0 || m.truncation > 4096) fail(Err::IoError, "implausible truncation in '" + path + "'");

    SpectralVectorField f(m.truncation);
    const std::size_t m3 = f.modes_per_component();
    auto c0 = f.component(0);
    auto c1 = f.component(1);
    auto c2 = f.component(2);
    std::vector<double> row(6);
    for (std::size_t i = 0; i < m3; ++i) {
        if (std::fread(row.data(), sizeof(double), 6, fp.get()) != 6)
            fail(Err::IoError, "truncated payload in '" + path + "'");
        c0[i] = Cplx(row[0], row[1]);
        c1[i] = Cplx(row[2], row[3]);
        c2[i] = Cplx(row[4], row[5]);
    }
    if (std::fgetc(fp.get()) != EOF) fail(Err::IoError, "trailing bytes in '" + path + "'");

    if (m.reality_flag) {
        const double defect = reality_defect(f);
        if (defect > 1e-12)
            fail(Err::NotReal, "'" + path + "' declares a real field but defect is " + std::to_string(defect));
    }
    return {std::move(f), std::move(m)};
}

}  // namespace dynamo
