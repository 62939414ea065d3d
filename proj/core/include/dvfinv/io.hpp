#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dvfinv/grid.hpp"

namespace dvfinv {

enum class SampleType { Float32, Float64, UInt8 };
enum class Semantic { ForwardDvf, InverseDvf, ScalarMap, Mask };

std::string_view to_string(SampleType t);
std::string_view to_string(Semantic s);

// Text header next to a raw little-endian payload, component-major, x fastest.
struct ContainerHeader {
  Semantic semantic = Semantic::ForwardDvf;
  GridGeometry geometry;
  int components = 0;
  SampleType sample_type = SampleType::Float32;
  std::string payload;  // file name relative to the header's directory

  std::size_t sample_bytes() const;
  std::uintmax_t payload_bytes() const;
};

// Payload path written for header `header_path` (same stem, ".raw").
std::filesystem::path payload_path_for(const std::filesystem::path& header_path);

// Parses and validates a header without opening the payload.
ContainerHeader read_header(const std::filesystem::path& header_path);

void write_field(const std::filesystem::path& header_path, const VectorField& f,
                 Semantic semantic = Semantic::ForwardDvf, SampleType type = SampleType::Float64);
// Invalid samples are stored as NaN.
void write_field(const std::filesystem::path& header_path, const ScalarField& f,
                 SampleType type = SampleType::Float64);
void write_field(const std::filesystem::path& header_path, const DomainMask& m);

VectorField read_vector_field(const std::filesystem::path& header_path, Semantic* semantic = nullptr);
ScalarField read_scalar_field(const std::filesystem::path& header_path);
DomainMask read_mask(const std::filesystem::path& header_path);

}  // namespace dvfinv
