//! In-process stand-in for the ledger state database.
//!
//! A [`MockLedger`] is a sorted `String -> bytes` map plus the context of the
//! transaction currently executing. Contracts never touch it directly: a
//! [`StubHandle`] is created for the duration of one `mock_init` /
//! `mock_invoke` call and dropped (closing the transaction) when the contract
//! returns or unwinds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use crate::contract::{Contract, ContractResponse, StubHandle};
use crate::coverage::CoverageMap;
use crate::error::{Error, Result};

/// The transaction currently executing against a ledger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxContext {
    uuid: String,
    args: Vec<Vec<u8>>,
}

impl TxContext {
    pub fn uuid(&self) -> &str {
        &self.uuid
    }

    pub fn args(&self) -> &[Vec<u8>] {
        &self.args
    }
}

/// Per-call instrumentation: where coverage goes and when the call must stop.
pub struct CallEnv<'a> {
    pub coverage: &'a mut CoverageMap,
    pub deadline: Option<Instant>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CallKind {
    Init,
    Invoke,
}

#[derive(Debug, Default, Clone)]
pub struct MockLedger {
    state: BTreeMap<String, Vec<u8>>,
    current_tx: Option<TxContext>,
    invocation_count: u64,
}

impl MockLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> &BTreeMap<String, Vec<u8>> {
        &self.state
    }

    pub fn current_tx(&self) -> Option<&TxContext> {
        self.current_tx.as_ref()
    }

    pub fn invocation_count(&self) -> u64 {
        self.invocation_count
    }

    /// Writes `value` under `key`, replacing any previous value. Empty keys
    /// and empty values are accepted.
    pub fn put_state(&mut self, key: &str, value: &[u8]) -> Result<()> {
        self.require_tx()?;
        self.state.insert(key.to_owned(), value.to_vec());
        Ok(())
    }

    /// `Ok(None)` means the key was never written or has been deleted.
    pub fn get_state(&self, key: &str) -> Result<Option<&[u8]>> {
        self.require_tx()?;
        Ok(self.state.get(key).map(Vec::as_slice))
    }

    pub fn del_state(&mut self, key: &str) -> Result<()> {
        self.require_tx()?;
        self.state.remove(key);
        Ok(())
    }

    /// Runs the contract's `Init` inside a fresh transaction, discarding
    /// coverage.
    pub fn mock_init(
        &mut self,
        uuid: &str,
        args: &[Vec<u8>],
        contract: &dyn Contract,
    ) -> Result<ContractResponse> {
        let mut coverage = CoverageMap::new();
        self.mock_init_with(
            uuid,
            args,
            contract,
            CallEnv {
                coverage: &mut coverage,
                deadline: None,
            },
        )
    }

    /// Runs the contract's `Invoke` inside a fresh transaction, discarding
    /// coverage.
    pub fn mock_invoke(
        &mut self,
        uuid: &str,
        args: &[Vec<u8>],
        contract: &dyn Contract,
    ) -> Result<ContractResponse> {
        let mut coverage = CoverageMap::new();
        self.mock_invoke_with(
            uuid,
            args,
            contract,
            CallEnv {
                coverage: &mut coverage,
                deadline: None,
            },
        )
    }

    pub fn mock_init_with(
        &mut self,
        uuid: &str,
        args: &[Vec<u8>],
        contract: &dyn Contract,
        env: CallEnv<'_>,
    ) -> Result<ContractResponse> {
        self.call(CallKind::Init, uuid, args, contract, env)
    }

    pub fn mock_invoke_with(
        &mut self,
        uuid: &str,
        args: &[Vec<u8>],
        contract: &dyn Contract,
        env: CallEnv<'_>,
    ) -> Result<ContractResponse> {
        self.call(CallKind::Invoke, uuid, args, contract, env)
    }

    fn call(
        &mut self,
        kind: CallKind,
        uuid: &str,
        args: &[Vec<u8>],
        contract: &dyn Contract,
        env: CallEnv<'_>,
    ) -> Result<ContractResponse> {
        if uuid.is_empty() {
            return Err(Error::EmptyTxId);
        }
        if self.current_tx.is_some() {
            return Err(Error::TransactionAlreadyOpen);
        }
        self.current_tx = Some(TxContext {
            uuid: uuid.to_owned(),
            args: args.to_vec(),
        });

        // The handle closes the transaction when dropped, including when the
        // contract unwinds. No rollback: writes made before a failure stay.
        let response = {
            let mut stub = StubHandle::new(self, env.coverage, env.deadline);
            match kind {
                CallKind::Init => contract.init(&mut stub, args),
                CallKind::Invoke => contract.invoke(&mut stub, args),
            }
        };
        debug_assert!(self.current_tx.is_none());
        self.invocation_count += 1;
        Ok(response)
    }

    pub(crate) fn close_tx(&mut self) {
        self.current_tx = None;
    }

    fn require_tx(&self) -> Result<()> {
        if self.current_tx.is_none() {
            return Err(Error::NoOpenTransaction);
        }
        Ok(())
    }

    /// One `hex(key)=hex(value)` line per entry, sorted by key.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.state {
            let _ = writeln!(out, "{}={}", hex::encode(key.as_bytes()), hex::encode(value));
        }
        out
    }
}
