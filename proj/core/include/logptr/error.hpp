#pragma once

#include <stdexcept>
#include <string>

namespace logptr {

// Every failure the library reports, one code per contract violation.
// The CLI maps these to exit codes and the machine-parsable
// "ERROR <code>: message" stderr prefix.
enum class Errc {
  // ingest
  MissingColumn,
  MalformedRow,
  UnknownLabel,
  EmptyMessage,
  AlignmentFailure,
  TooFewRecords,
  IndexOutOfRange,
  // tokenizer
  TargetTooSmall,
  // numcore
  ShapeMismatch,
  AllMasked,
  NumericError,
  // trainer
  EmptyTrainSet,
  BadMagic,
  VersionMismatch,
  ChecksumMismatch,
  TruncatedFile,
  MalformedMetadata,
  VocabMismatch,
  // metrics
  EmptyCorpus,
  TooFewDatasets,
  // plumbing
  IoError,
  ConfigError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace logptr
