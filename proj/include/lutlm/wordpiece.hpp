// Copyright (c) 2026 The lutlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "lutlm/vocabulary.hpp"

namespace lutlm {

// Splits raw text on whitespace, then splits punctuation and emoji
// codepoints into single-character tokens. Pre-tokens that classify as a
// URL, a mention, or a listed emoticon are kept whole so the per-kind loss
// weighting applies to the whole unit.
std::vector<std::string> pretokenize(const std::string& text, const Vocabulary& vocab);

// URLs and mentions collapse onto their sentinel vocabulary tokens; other
// pre-tokens pass through.
std::string normalize_pretoken(const std::string& pretoken, const Vocabulary& vocab);

// Greedy longest-match subword split of one whitespace-free pre-token.
// Continuation pieces carry the "##" prefix; a pre-token with no full cover
// becomes a single [UNK].
std::vector<std::string> wordpiece_tokenize(const std::string& pretoken, const Vocabulary& vocab);

// Inverse of wordpiece_tokenize for [UNK]-free piece sequences.
std::string wordpiece_detokenize(const std::vector<std::string>& pieces);

// Full pipeline for one tweet: pretokenize, normalize, wordpiece. The
// pre-token boundaries are preserved in `pretoken_of_piece` (index into the
// normalized pre-token list) so sentence splitting can run on pre-tokens.
struct TokenizedText {
  std::vector<std::string> pretokens;   // normalized
  std::vector<std::string> pieces;      // wordpiece tokens, flattened
  std::vector<std::size_t> piece_owner; // pieces[i] came from pretokens[piece_owner[i]]
};

TokenizedText tokenize_text(const std::string& text, const Vocabulary& vocab);

}  // namespace lutlm
