#include "logptr/error.hpp"

namespace logptr {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::EmptyMessage: return "EmptyMessage";
    case Errc::AlignmentFailure: return "AlignmentFailure";
    case Errc::TooFewRecords: return "TooFewRecords";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::TargetTooSmall: return "TargetTooSmall";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::AllMasked: return "AllMasked";
    case Errc::NumericError: return "NumericError";
    case Errc::EmptyTrainSet: return "EmptyTrainSet";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::MalformedMetadata: return "MalformedMetadata";
    case Errc::VocabMismatch: return "VocabMismatch";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::TooFewDatasets: return "TooFewDatasets";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace logptr
