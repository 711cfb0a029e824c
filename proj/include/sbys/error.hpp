#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbys {

// Root of every error the library throws. `kind()` is a stable tag used in
// error records written to disk.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SBYS_DEFINE_ERROR(Name, Base)                                  \
  class Name : public Base {                                           \
   public:                                                             \
    explicit Name(const std::string& message) : Base(#Name, message) {} \
                                                                       \
   protected:                                                          \
    Name(std::string kind, const std::string& message)                 \
        : Base(std::move(kind), message) {}                            \
  };

SBYS_DEFINE_ERROR(IoError, Error)
SBYS_DEFINE_ERROR(PreconditionError, Error)
SBYS_DEFINE_ERROR(ConfigError, Error)
SBYS_DEFINE_ERROR(UsageError, Error)

// corpus
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("ParseError", "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class DuplicateIndex : public Error {
 public:
  DuplicateIndex(const std::string& doc_id, std::size_t index)
      : Error("DuplicateIndex",
              "duplicate segment index " + std::to_string(index) +
                  " in document '" + doc_id + "'"),
        doc_id_(doc_id),
        index_(index) {}
  const std::string& doc_id() const noexcept { return doc_id_; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::string doc_id_;
  std::size_t index_;
};

// prompts
SBYS_DEFINE_ERROR(UnknownTemplate, Error)
class MissingPlaceholder : public Error {
 public:
  explicit MissingPlaceholder(const std::string& name)
      : Error("MissingPlaceholder", "missing placeholder binding: " + name),
        name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// llm
SBYS_DEFINE_ERROR(BackendError, Error)
SBYS_DEFINE_ERROR(TransportError, BackendError)
SBYS_DEFINE_ERROR(Timeout, TransportError)
SBYS_DEFINE_ERROR(BackendRefusal, BackendError)
SBYS_DEFINE_ERROR(EmptyCompletion, BackendError)
class ReplayMiss : public BackendError {
 public:
  explicit ReplayMiss(const std::string& digest)
      : BackendError("ReplayMiss", "replay cache miss for request " + digest),
        digest_(digest) {}
  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

// pipeline / baselines
class EmptyTranslation : public Error {
 public:
  explicit EmptyTranslation(const std::string& stage)
      : Error("EmptyTranslation", "stage '" + stage + "' produced an empty translation"),
        stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};
class ParseFailure : public Error {
 public:
  ParseFailure(const std::string& reason, std::string raw_text)
      : Error("ParseFailure", "could not parse artifacts: " + reason),
        raw_text_(std::move(raw_text)) {}
  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::string raw_text_;
};

// A document-level failure annotated with the stage that raised it.
class StageFailure : public Error {
 public:
  StageFailure(std::string doc_id, std::string stage, const Error& cause)
      : Error(cause.kind(), doc_id + " [" + stage + "]: " + cause.what()),
        doc_id_(std::move(doc_id)),
        stage_(std::move(stage)) {}
  const std::string& doc_id() const noexcept { return doc_id_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string doc_id_;
  std::string stage_;
};
SBYS_DEFINE_ERROR(LengthMismatch, Error)
SBYS_DEFINE_ERROR(SelectorError, Error)
SBYS_DEFINE_ERROR(UnsupportedLanguagePair, Error)

// metrics / stats / report
SBYS_DEFINE_ERROR(PluginProtocolError, Error)
SBYS_DEFINE_ERROR(MissingReference, Error)
SBYS_DEFINE_ERROR(EmptyCorpus, Error)
SBYS_DEFINE_ERROR(MissingDomain, Error)
SBYS_DEFINE_ERROR(MissingBaselineRow, Error)

#undef SBYS_DEFINE_ERROR

}  // namespace sbys
