#include "dplb/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "dplb/errors.hpp"

namespace dplb::io {

namespace {

using nlohmann::json;

std::string expect_kv(const std::string& token, const std::string& key,
                      const std::filesystem::path& path) {
    const std::string prefix = key + "=";
    if (token.rfind(prefix, 0) != 0)
        throw ConfigError(path.string() + ": expected " + prefix + "..., got '" + token + "'");
    return token.substr(prefix.size());
}

std::size_t parse_size(const std::string& text, const std::filesystem::path& path) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError(path.string() + ": bad integer '" + text + "'");
    return value;
}

fpcode::CodeParams params_from_header(std::size_t n, double xi, std::size_t d_core) {
    const fpcode::CodeParams formula = fpcode::derive_params(n, xi);
    if (formula.d_core == d_core) return formula;
    return fpcode::derive_params_with_length(n, xi, d_core);
}

json params_json(const fpcode::CodeParams& params) {
    return json{{"n", params.n},
                {"xi", params.xi},
                {"d_core", params.d_core},
                {"d_overridden", params.d_overridden}};
}

fpcode::CodeParams params_from_json(const json& value, const std::filesystem::path& path) {
    if (!value.is_object() || !value.contains("n") || !value.contains("xi") ||
        !value.contains("d_core"))
        throw ConfigError(path.string() + ": params object needs n, xi, d_core");
    return params_from_header(value["n"].get<std::size_t>(), value["xi"].get<double>(),
                              value["d_core"].get<std::size_t>());
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw ConfigError("format_double: value not representable");
    return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("bad number: '" + text + "'");
    return value;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw ConfigError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_codebook(const std::filesystem::path& path, const fpcode::Codebook& codebook) {
    std::ostringstream out;
    out << "fpcode v1 n=" << codebook.params.n << " d_core=" << codebook.params.d_core
        << " xi=" << format_double(codebook.params.xi) << "\n";
    for (std::size_t i = 0; i < codebook.bits.rows(); ++i) {
        for (std::size_t j = 0; j < codebook.bits.cols(); ++j)
            out.put(codebook.bits(i, j) ? '1' : '0');
        out.put('\n');
    }
    write_text(path, out.str());
}

fpcode::Codebook read_codebook(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw ConfigError(path.string() + ": missing header");
    std::istringstream tokens(header);
    std::string magic, version, n_tok, d_tok, xi_tok;
    tokens >> magic >> version >> n_tok >> d_tok >> xi_tok;
    if (magic != "fpcode" || version != "v1")
        throw ConfigError(path.string() + ": not an fpcode v1 file");
    const std::size_t n = parse_size(expect_kv(n_tok, "n", path), path);
    const std::size_t d_core = parse_size(expect_kv(d_tok, "d_core", path), path);
    const double xi = parse_double(expect_kv(xi_tok, "xi", path));

    fpcode::Codebook codebook;
    codebook.params = params_from_header(n, xi, d_core);
    const std::size_t d_total = codebook.params.d_total();
    codebook.bits = BitMatrix(n, d_total);
    std::string line;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw ConfigError(path.string() + ": expected " + std::to_string(n) + " rows");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.size() != d_total)
            throw ConfigError(path.string() + ": row " + std::to_string(i) + " has length " +
                              std::to_string(line.size()) + ", expected " +
                              std::to_string(d_total));
        for (std::size_t j = 0; j < d_total; ++j) {
            if (line[j] == '0')
                codebook.bits(i, j) = 0;
            else if (line[j] == '1')
                codebook.bits(i, j) = 1;
            else
                throw ConfigError(path.string() + ": row " + std::to_string(i) +
                                  " has a character other than 0/1");
        }
    }
    return codebook;
}

void write_secret(const std::filesystem::path& path, const fpcode::CodeSecret& secret) {
    json marks = json::array();
    for (const fpcode::DummyMark mark : secret.dummy_marks) {
        switch (mark) {
            case fpcode::DummyMark::real: marks.push_back("real"); break;
            case fpcode::DummyMark::zero: marks.push_back("zero"); break;
            case fpcode::DummyMark::one: marks.push_back("one"); break;
        }
    }
    const json value{{"p", secret.column_probs},
                     {"perm", secret.perm},
                     {"dummy_marks", marks},
                     {"params", params_json(secret.params)}};
    write_text(path, value.dump(2) + "\n");
}

fpcode::CodeSecret read_secret(const std::filesystem::path& path) {
    const json value = read_json(path);
    if (!value.is_object() || !value.contains("p") || !value.contains("perm") ||
        !value.contains("dummy_marks") || !value.contains("params"))
        throw ConfigError(path.string() + ": secret needs p, perm, dummy_marks, params");

    fpcode::CodeSecret secret;
    secret.params = params_from_json(value["params"], path);
    secret.column_probs = value["p"].get<std::vector<double>>();
    secret.perm = value["perm"].get<std::vector<std::size_t>>();
    for (const auto& mark : value["dummy_marks"]) {
        const std::string text = mark.get<std::string>();
        if (text == "real")
            secret.dummy_marks.push_back(fpcode::DummyMark::real);
        else if (text == "zero")
            secret.dummy_marks.push_back(fpcode::DummyMark::zero);
        else if (text == "one")
            secret.dummy_marks.push_back(fpcode::DummyMark::one);
        else
            throw ConfigError(path.string() + ": unknown dummy mark '" + text + "'");
    }

    const std::size_t d = secret.params.d_core;
    const std::size_t d_total = secret.params.d_total();
    if (secret.column_probs.size() != d)
        throw IntegrityError(path.string() + ": p has wrong length");
    if (secret.perm.size() != d_total || secret.dummy_marks.size() != d_total)
        throw IntegrityError(path.string() + ": perm/dummy_marks have wrong length");
    std::vector<bool> seen(d_total, false);
    std::size_t real_count = 0, zero_count = 0, one_count = 0;
    for (std::size_t pos = 0; pos < d_total; ++pos) {
        const std::size_t src = secret.perm[pos];
        if (src >= d_total || seen[src])
            throw IntegrityError(path.string() + ": perm is not a bijection");
        seen[src] = true;
        switch (secret.dummy_marks[pos]) {
            case fpcode::DummyMark::real: ++real_count; break;
            case fpcode::DummyMark::zero: ++zero_count; break;
            case fpcode::DummyMark::one: ++one_count; break;
        }
    }
    if (real_count != d || zero_count != 2 * d || one_count != 2 * d)
        throw IntegrityError(path.string() + ": dummy mark counts must be (d, 2d, 2d)");
    return secret;
}

void write_dataset(const std::filesystem::path& path, const erm::Dataset& data) {
    std::ostringstream out;
    out << "d=" << data.dim() << " tag=" << erm::to_string(data.tag) << "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto row = data.points.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j > 0) out.put(',');
            out << format_double(row[j]);
        }
        out.put('\n');
    }
    write_text(path, out.str());
}

erm::Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw ConfigError(path.string() + ": missing header");
    std::istringstream tokens(header);
    std::string d_tok, tag_tok;
    tokens >> d_tok >> tag_tok;
    const std::size_t d = parse_size(expect_kv(d_tok, "d", path), path);
    const erm::DomainTag tag = erm::domain_tag_from_string(expect_kv(tag_tok, "tag", path));

    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(d);
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::size_t end = comma == std::string::npos ? line.size() : comma;
            row.push_back(parse_double(line.substr(start, end - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (row.size() != d)
            throw ConfigError(path.string() + ": row has " + std::to_string(row.size()) +
                              " values, expected " + std::to_string(d));
        rows.push_back(std::move(row));
    }

    erm::Dataset data;
    data.tag = tag;
    data.points = Matrix(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) data.points(i, j) = rows[i][j];
    erm::validate_domain(data);
    return data;
}

void write_word(const std::filesystem::path& path, const BinaryWord& word) {
    std::string text(word.size(), '0');
    for (std::size_t j = 0; j < word.size(); ++j)
        if (word[j]) text[j] = '1';
    write_text(path, text + "\n");
}

BinaryWord read_word(const std::filesystem::path& path) {
    std::string text = read_text(path);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    if (text.empty()) throw ConfigError(path.string() + ": empty word file");
    BinaryWord word(text.size());
    for (std::size_t j = 0; j < text.size(); ++j) {
        if (text[j] == '0')
            word[j] = 0;
        else if (text[j] == '1')
            word[j] = 1;
        else
            throw ConfigError(path.string() + ": word must contain only 0/1 characters");
    }
    return word;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
    write_text(path, value.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& err) {
        throw ConfigError(path.string() + ": " + err.what());
    }
}

nlohmann::json security_stats_json(const marking::SecurityStats& stats) {
    return json{{"trials", stats.trials},
                {"completeness_failures", stats.completeness_failures},
                {"false_accusations", stats.false_accusations},
                {"mean_violation_fraction", stats.mean_violation_fraction()}};
}

std::string security_trials_csv(const marking::SecurityStats& stats) {
    std::ostringstream out;
    out << "trial,accused,violation_fraction,in_F_beta\n";
    for (const marking::TrialRecord& record : stats.records) {
        out << record.trial << ',';
        if (record.accused) out << *record.accused;
        out << ',' << format_double(record.violation_fraction) << ','
            << (record.in_f_beta ? 1 : 0) << '\n';
    }
    return out.str();
}

nlohmann::json excess_report_json(const erm::ExcessLossReport& report) {
    return json{{"loss_at_theta", report.loss_at_theta},
                {"optimal_loss", report.optimal_loss},
                {"excess", report.excess},
                {"minimizer", report.minimizer}};
}

}  // namespace dplb::io
