pub mod oracle;
pub mod walk;
