#pragma once

#include <string>
#include <vector>

#include "textsr/backbone/init.hpp"
#include "textsr/core/ops.hpp"

namespace textsr {

template <typename T>
struct PromptEmbedding {
    std::vector<int> ids;
    ag::Var<T> embeddings; // {L, e}
    int tex_index = -1;    // position of the "text" token
};

// Toy text encoder: a learned embedding table over a small fixed vocabulary.
// The prompt must contain the keyword "text" exactly once so its attention
// slice is well defined.
template <typename T>
struct TextEncoder {
    std::vector<std::string> vocab;
    ag::Var<T> table; // {V, e}

    TextEncoder() = default;

    TextEncoder(Rng& rng, std::vector<std::string> vocab_, int embed_dim)
        : vocab(std::move(vocab_)) {
        if (vocab.empty()) throw ParamError("text encoder: empty vocabulary");
        table = init::normal<T>(rng, {static_cast<int>(vocab.size()), embed_dim}, 0.02);
    }

    int token_id(const std::string& tok) const {
        for (size_t i = 0; i < vocab.size(); ++i)
            if (vocab[i] == tok) return static_cast<int>(i);
        throw PromptError("text encoder: token '" + tok + "' not in vocabulary");
    }

    PromptEmbedding<T> embed_prompt(const std::vector<std::string>& prompt) const {
        PromptEmbedding<T> out;
        for (size_t i = 0; i < prompt.size(); ++i) {
            out.ids.push_back(token_id(prompt[i]));
            if (prompt[i] == "text") {
                if (out.tex_index >= 0)
                    throw PromptError("prompt: keyword 'text' appears more than once");
                out.tex_index = static_cast<int>(i);
            }
        }
        if (out.tex_index < 0) throw PromptError("prompt: keyword 'text' missing");
        out.embeddings = ag::embedding(table, out.ids);
        return out;
    }

    void visit(const std::string& prefix, const ParamVisitor<T>& v) const {
        v(prefix + ".table", table);
    }
};

} // namespace textsr
