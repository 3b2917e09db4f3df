// Copyright (c) 2026 The lutlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lutlm {

// Every token has exactly one kind; the kind selects the loss multiplier.
enum class TokenKind { Regular, Emoji, Url, Mention, Special };

const char* token_kind_name(TokenKind kind);

// Per-kind loss multipliers. Emojis are up-weighted because they carry the
// signal downstream tasks care about; URLs and mentions are kept in the
// vocabulary but weighted down to 0.02 so the model does not fixate on them.
struct WeightTable {
  double regular = 1.0;
  double emoji = 2.0;
  double url = 0.02;
  double mention = 0.02;
  double special = 0.0;

  double weight_for(TokenKind kind) const {
    switch (kind) {
      case TokenKind::Regular: return regular;
      case TokenKind::Emoji: return emoji;
      case TokenKind::Url: return url;
      case TokenKind::Mention: return mention;
      case TokenKind::Special: return special;
    }
    return regular;
  }
};

inline constexpr const char* kPadToken = "[PAD]";
inline constexpr const char* kUnkToken = "[UNK]";
inline constexpr const char* kClsToken = "[CLS]";
inline constexpr const char* kSepToken = "[SEP]";
inline constexpr const char* kMaskToken = "[MASK]";
inline constexpr const char* kUrlToken = "_URL_";
inline constexpr const char* kMentionToken = "_MENTION_";

// Bijective token<->id mapping with contiguous ids from 0. The base file
// supplies ids in line order ([PAD] must be line 0); the sentinel tokens
// _URL_ / _MENTION_ and the emoticon augmentation are appended after it.
class Vocabulary {
 public:
  std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()); }
  std::int32_t base_size() const { return base_size_; }
  std::int32_t augmentation_size() const { return size() - base_size_; }

  const std::string& token(std::int32_t id) const;
  std::optional<std::int32_t> id_of(const std::string& token) const;
  bool contains(const std::string& token) const { return ids_.count(token) > 0; }
  bool is_emoticon(const std::string& token) const { return emoticons_.count(token) > 0; }

  std::int32_t pad_id() const { return pad_id_; }
  std::int32_t unk_id() const { return unk_id_; }
  std::int32_t cls_id() const { return cls_id_; }
  std::int32_t sep_id() const { return sep_id_; }
  std::int32_t mask_id() const { return mask_id_; }

  // Loads base tokens (one per line, line index = id), appends _URL_ and
  // _MENTION_ if absent, then appends the emoticon file. Duplicates and
  // missing specials are errors.
  static Vocabulary load(const std::string& vocab_path, const std::string& emoticon_path = "");

  // Same construction from in-memory token lists (used heavily by tests).
  static Vocabulary from_tokens(const std::vector<std::string>& base,
                                const std::vector<std::string>& emoticons = {});

 private:
  void append(const std::string& token, const char* origin, std::size_t line_no);
  void finalize_specials();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> ids_;
  std::unordered_set<std::string> emoticons_;
  std::int32_t base_size_ = 0;
  std::int32_t pad_id_ = -1, unk_id_ = -1, cls_id_ = -1, sep_id_ = -1, mask_id_ = -1;
};

// Decodes UTF-8 into codepoints; invalid bytes decode as U+FFFD.
std::vector<char32_t> utf8_codepoints(const std::string& s);

bool is_emoji_codepoint(char32_t cp);

// Total classification with precedence special > url > mention > emoji > regular.
TokenKind classify_token(const std::string& token, const Vocabulary& vocab);

}  // namespace lutlm
