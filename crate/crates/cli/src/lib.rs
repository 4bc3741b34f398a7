//! Library side of the `sortkd` command-line tool: record I/O and one
//! module per subcommand.

pub mod bench;
pub mod error;
pub mod inspect;
pub mod records;
pub mod train;
pub mod transform;
pub mod verify;

pub use error::CliError;
pub use records::{parse_records, write_record, LogitRecord, RecordReader};
