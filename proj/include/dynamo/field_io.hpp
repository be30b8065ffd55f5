#pragma once

#include <string>

#include "dynamo/fourier_field.hpp"

namespace dynamo {

struct FieldManifest {
    int format_version = 1;
    int truncation = 0;
    bool reality_flag = false;
    std::string layout = "lex_kx_ky_kz";
    std::string scalar = "f64le";
};

// One JSON manifest line, then raw little-endian binary: for each mode in lex
// order (k1 outermost) the six doubles re0,im0,re1,im1,re2,im2. Round trips are
// bit-exact.
void save_field(const std::string& path, const SpectralVectorField& f, bool reality_flag);

struct LoadedField {
    SpectralVectorField field;
    FieldManifest manifest;
};

LoadedField load_field(const std::string& path);

}  // namespace dynamo
