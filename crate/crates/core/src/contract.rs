//! The interface fuzz targets implement, and the `args[0]` dispatch
//! convention.

use std::borrow::Cow;
use std::time::Instant;

use crate::coverage::{site_id, CoverageMap};
use crate::ledger::MockLedger;

/// Status/payload/message triple returned by `Init` and `Invoke`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractResponse {
    pub status: u16,
    pub payload: Vec<u8>,
    pub message: String,
}

impl ContractResponse {
    pub const OK: u16 = 200;
    pub const ERROR: u16 = 500;

    pub fn ok(payload: impl Into<Vec<u8>>) -> Self {
        Self {
            status: Self::OK,
            payload: payload.into(),
            message: String::new(),
        }
    }

    /// A failure response. The message is never empty.
    pub fn error(message: impl Into<String>) -> Self {
        let mut message = message.into();
        if message.is_empty() {
            message.push_str("error");
        }
        Self {
            status: Self::ERROR,
            payload: Vec::new(),
            message,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Self::OK
    }
}

/// Unwind payload raised by a [`StubHandle`] once the per-execution deadline
/// has passed.
#[derive(Debug, Clone, Copy)]
pub struct DeadlineExceeded;

/// Capability handed to a contract for the duration of one call.
///
/// Every state access also records a coverage site derived from the current
/// function name and the index of the access within the call, and checks the
/// execution deadline.
pub struct StubHandle<'a> {
    ledger: &'a mut MockLedger,
    coverage: &'a mut CoverageMap,
    deadline: Option<Instant>,
    function: String,
    call_index: u32,
}

impl<'a> StubHandle<'a> {
    pub(crate) fn new(
        ledger: &'a mut MockLedger,
        coverage: &'a mut CoverageMap,
        deadline: Option<Instant>,
    ) -> Self {
        Self {
            ledger,
            coverage,
            deadline,
            function: String::new(),
            call_index: 0,
        }
    }

    pub fn tx_id(&self) -> &str {
        self.ledger.current_tx().map(|tx| tx.uuid()).unwrap_or_default()
    }

    pub fn put_state(&mut self, key: &str, value: &[u8]) {
        self.access_site();
        self.ledger
            .put_state(key, value)
            .expect("stub handle outlived its transaction");
    }

    pub fn get_state(&mut self, key: &str) -> Option<Vec<u8>> {
        self.access_site();
        self.ledger
            .get_state(key)
            .expect("stub handle outlived its transaction")
            .map(<[u8]>::to_vec)
    }

    pub fn del_state(&mut self, key: &str) {
        self.access_site();
        self.ledger
            .del_state(key)
            .expect("stub handle outlived its transaction");
    }

    /// Records a hit on an explicit instrumentation site.
    pub fn cover(&mut self, site: u32) {
        self.check_deadline();
        self.coverage.record(site);
    }

    pub(crate) fn enter_function(&mut self, name: &str) {
        self.function.clear();
        self.function.push_str(name);
        self.call_index = 0;
        self.cover(site_id(&[b"fn", name.as_bytes()]));
    }

    fn access_site(&mut self) {
        let index = self.call_index.to_le_bytes();
        let site = site_id(&[b"state", self.function.as_bytes(), &index]);
        self.call_index = self.call_index.wrapping_add(1);
        self.cover(site);
    }

    fn check_deadline(&self) {
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                std::panic::panic_any(DeadlineExceeded);
            }
        }
    }
}

impl Drop for StubHandle<'_> {
    fn drop(&mut self) {
        self.ledger.close_tx();
    }
}

/// A contract runnable against a [`MockLedger`].
///
/// Implementations hold no mutable global state; everything persistent goes
/// through the [`StubHandle`]. Aborts (panics) are allowed and are captured
/// by the fuzz harness.
pub trait Contract: Send + Sync {
    fn name(&self) -> &str;

    fn init(&self, stub: &mut StubHandle<'_>, args: &[Vec<u8>]) -> ContractResponse;

    fn invoke(&self, stub: &mut StubHandle<'_>, args: &[Vec<u8>]) -> ContractResponse;

    /// String literals declared by the contract (function names, fixed keys),
    /// used to seed the mutation dictionary.
    fn literals(&self) -> Vec<Vec<u8>> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DispatchError {
    #[error("missing function name")]
    MissingFunctionName,
}

/// Function selector and parameters split out of an invoke args list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dispatch<'a> {
    pub function: Cow<'a, str>,
    pub params: &'a [Vec<u8>],
}

/// Splits `args` into a function name (lossy UTF-8 of `args[0]`) and the
/// remaining parameters.
pub fn dispatch(args: &[Vec<u8>]) -> Result<Dispatch<'_>, DispatchError> {
    let (first, params) = args.split_first().ok_or(DispatchError::MissingFunctionName)?;
    Ok(Dispatch {
        function: String::from_utf8_lossy(first),
        params,
    })
}

pub type Handler = fn(&mut StubHandle<'_>, &[Vec<u8>]) -> ContractResponse;

/// Dispatches `args` to the matching entry in `table`. Misses return a
/// status-500 response naming the unknown function.
pub fn route(stub: &mut StubHandle<'_>, args: &[Vec<u8>], table: &[(&str, Handler)]) -> ContractResponse {
    let call = match dispatch(args) {
        Ok(call) => call,
        Err(e) => return ContractResponse::error(e.to_string()),
    };
    match table.iter().find(|(name, _)| *name == call.function) {
        Some((name, handler)) => {
            stub.enter_function(name);
            handler(stub, call.params)
        }
        None => ContractResponse::error(format!("unknown function {:?}", call.function)),
    }
}
