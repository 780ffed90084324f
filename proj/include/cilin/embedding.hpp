#ifndef CILIN_EMBEDDING_HPP
#define CILIN_EMBEDDING_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cilin {

using Vector = std::vector<double>;

// Token -> dense vector map. Immutable once loaded; concurrent reads are safe.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dimension);

    // Word-vector text format: a "V d" header, then V rows "token v1 ... vd".
    // Duplicate tokens are last-wins and counted in duplicate_count().
    static EmbeddingTable load(std::istream& in);
    static EmbeddingTable load_file(const std::filesystem::path& path);

    // Returns true if the token replaced an existing entry.
    bool insert(std::string token, Vector values);

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t duplicate_count() const { return duplicates_; }
    bool contains(std::string_view token) const;

    // Throws OovError for an absent token.
    std::span<const double> lookup(std::string_view token) const;
    const Vector* find(std::string_view token) const;

    // Tokens in code-point order.
    std::vector<std::string> tokens() const;

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    };

    std::size_t dimension_;
    std::size_t duplicates_ = 0;
    std::unordered_map<std::string, Vector, Hash, std::equal_to<>> entries_;
};

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);

// dot(u,v) / (|u||v|), clamped to [-1, 1]. Throws UndefinedSimilarityError on a zero vector.
double cosine(std::span<const double> u, std::span<const double> v);

struct EncodedText {
    Vector vector;
    std::size_t token_count = 0;
};

// Mean of the in-vocabulary token vectors, L2-normalized. Out-of-vocabulary tokens
// are skipped; throws UnencodableError when none remain.
EncodedText encode_text(const EmbeddingTable& table, std::span<const std::string> tokens);

// Splits on '/', whitespace and the path arrow. A piece absent from the table is
// replaced by its individual characters.
std::vector<std::string> tokenize(std::string_view text, const EmbeddingTable& table);

// Text -> unit vector. Implementations must be thread-safe for concurrent encode().
class Encoder {
public:
    virtual ~Encoder() = default;
    virtual EncodedText encode(std::string_view text) const = 0;
};

class AveragingEncoder final : public Encoder {
public:
    explicit AveragingEncoder(const EmbeddingTable& table) : table_(table) {}
    EncodedText encode(std::string_view text) const override;

private:
    const EmbeddingTable& table_;
};

} // namespace cilin

#endif
