#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "dplb/erm.hpp"
#include "dplb/fpcode.hpp"
#include "dplb/marking.hpp"

namespace dplb::io {

// Shortest round-tripping decimal form; identical inputs always format to
// identical bytes, which is what makes rerun outputs byte-comparable.
std::string format_double(double value);
double parse_double(const std::string& text);

// Codebook: "fpcode v1 n=<n> d_core=<d> xi=<xi>" then n rows of 0/1 chars of
// length 5*d_core.
void write_codebook(const std::filesystem::path& path, const fpcode::Codebook& codebook);
fpcode::Codebook read_codebook(const std::filesystem::path& path);

// CodeSecret as JSON: p, perm, dummy_marks ("real"|"zero"|"one"), params.
void write_secret(const std::filesystem::path& path, const fpcode::CodeSecret& secret);
fpcode::CodeSecret read_secret(const std::filesystem::path& path);

// Dataset CSV with header "d=<d> tag=<tag>".
void write_dataset(const std::filesystem::path& path, const erm::Dataset& data);
erm::Dataset read_dataset(const std::filesystem::path& path);

// Word file: one line of 0/1 characters.
void write_word(const std::filesystem::path& path, const BinaryWord& word);
BinaryWord read_word(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

nlohmann::json security_stats_json(const marking::SecurityStats& stats);
std::string security_trials_csv(const marking::SecurityStats& stats);
nlohmann::json excess_report_json(const erm::ExcessLossReport& report);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace dplb::io
