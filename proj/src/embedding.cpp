#include "cilin/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "cilin/errors.hpp"
#include "cilin/text.hpp"

namespace cilin {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

} // namespace

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw ParameterError("embedding dimension must be positive");
}

EmbeddingTable EmbeddingTable::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw LoadError("missing header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_spaces(line);
    long long vocab = 0;
    long long dim = 0;
    try {
        if (header.size() != 2) throw LoadError("");
        vocab = parse_integer(header[0]);
        dim = parse_integer(header[1]);
    } catch (const LoadError&) {
        throw LoadError("malformed header '" + line + "', expected \"V d\"", 1);
    }
    if (vocab < 0 || dim <= 0) throw LoadError("malformed header '" + line + "', expected \"V d\"", 1);

    EmbeddingTable table(static_cast<std::size_t>(dim));
    std::size_t line_no = 1;
    for (long long row = 0; row < vocab; ++row) {
        ++line_no;
        if (!std::getline(in, line))
            throw LoadError("expected " + std::to_string(vocab) + " rows, stream ended", line_no);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_spaces(line);
        if (fields.empty()) throw LoadError("empty row", line_no);
        std::size_t got = fields.size() - 1;
        if (got != table.dimension_)
            throw LoadError("expected " + std::to_string(dim) + " components, got " + std::to_string(got),
                            line_no);
        Vector values(table.dimension_);
        for (std::size_t j = 0; j < got; ++j) {
            double v = 0.0;
            try {
                v = parse_double(fields[j + 1]);
            } catch (const LoadError& e) {
                throw LoadError(e.what(), line_no);
            }
            if (!std::isfinite(v)) throw LoadError("non-finite component " + std::to_string(j + 1), line_no);
            values[j] = v;
        }
        table.insert(std::string(fields[0]), std::move(values));
    }
    return table;
}

EmbeddingTable EmbeddingTable::load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open embeddings file " + path.string());
    try {
        return load(in);
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

bool EmbeddingTable::insert(std::string token, Vector values) {
    if (token.empty()) throw ParameterError("empty embedding token");
    if (values.size() != dimension_)
        throw ParameterError("vector for '" + token + "' has " + std::to_string(values.size()) +
                             " components, table dimension is " + std::to_string(dimension_));
    for (double v : values)
        if (!std::isfinite(v)) throw ParameterError("non-finite component in vector for '" + token + "'");
    auto [it, inserted] = entries_.insert_or_assign(std::move(token), std::move(values));
    if (!inserted) ++duplicates_;
    return !inserted;
}

bool EmbeddingTable::contains(std::string_view token) const { return entries_.find(token) != entries_.end(); }

const Vector* EmbeddingTable::find(std::string_view token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
}

std::span<const double> EmbeddingTable::lookup(std::string_view token) const {
    const Vector* v = find(token);
    if (!v) throw OovError(std::string(token));
    return *v;
}

std::vector<std::string> EmbeddingTable::tokens() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [token, _] : entries_) out.push_back(token);
    std::sort(out.begin(), out.end());
    return out;
}

double dot(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw ParameterError("vector length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

double cosine(std::span<const double> u, std::span<const double> v) {
    double nu = norm(u);
    double nv = norm(v);
    if (nu == 0.0 || nv == 0.0) throw UndefinedSimilarityError();
    return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

EncodedText encode_text(const EmbeddingTable& table, std::span<const std::string> tokens) {
    if (tokens.empty()) throw UnencodableError({});
    EncodedText out;
    out.vector.assign(table.dimension(), 0.0);
    for (const auto& token : tokens) {
        const Vector* v = table.find(token);
        if (!v) continue;
        for (std::size_t i = 0; i < v->size(); ++i) out.vector[i] += (*v)[i];
        ++out.token_count;
    }
    if (out.token_count == 0) throw UnencodableError(std::vector<std::string>(tokens.begin(), tokens.end()));
    // The mean's 1/n factor cancels under normalization.
    double n = norm(out.vector);
    if (n == 0.0) throw UnencodableError(std::vector<std::string>(tokens.begin(), tokens.end()));
    for (double& x : out.vector) x /= n;
    return out;
}

std::vector<std::string> tokenize(std::string_view text, const EmbeddingTable& table) {
    std::vector<std::string> pieces;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) pieces.push_back(std::move(current));
        current.clear();
    };
    for (std::size_t i = 0; i < text.size();) {
        char c = text[i];
        if (c == '/' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            flush();
            ++i;
        } else if (text.substr(i, kPathSeparator.size()) == kPathSeparator) {
            flush();
            i += kPathSeparator.size();
        } else {
            current.push_back(c);
            ++i;
        }
    }
    flush();

    std::vector<std::string> out;
    for (auto& piece : pieces) {
        if (table.contains(piece)) {
            out.push_back(std::move(piece));
        } else {
            for (auto& ch : utf8_chars(piece)) out.push_back(std::move(ch));
        }
    }
    return out;
}

EncodedText AveragingEncoder::encode(std::string_view text) const {
    auto tokens = tokenize(text, table_);
    return encode_text(table_, tokens);
}

} // namespace cilin
