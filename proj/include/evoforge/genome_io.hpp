// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "evoforge/genome.hpp"

namespace evoforge {

inline constexpr std::uint16_t kGenomeFormatVersion = 1;

/// Canonical little-endian `.gnm` encoding: magic `EVFG`, u16 version, evaluation
/// header, then node, edge and recurrent-edge tables. Weights are stored bit-exact.
std::vector<std::uint8_t> serialize(const Genome &g);

/// Inverse of serialize(). Throws ParseError carrying the failing byte offset;
/// never returns a partially decoded genome.
Genome deserialize(std::span<const std::uint8_t> bytes);

/// Human-readable export carrying the same fields as the binary form.
std::string to_text(const Genome &g);

void write_genome_file(const std::filesystem::path &path, const Genome &g);
Genome read_genome_file(const std::filesystem::path &path);

/// 64-bit FNV-1a over the serialized bytes.
std::uint64_t genome_digest(const Genome &g);

} // namespace evoforge
