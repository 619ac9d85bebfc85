"""L2-IND privacy game, played in simulation mode against the real protocol stack.

Two complete instances (chain, operator, verifier, client oracle) are built
from the same seed.  Each round the adversary submits a query pair
``(Q0, Q1)``; after a public-consistency check, ``Q0`` goes to the client
oracle of instance ``b`` and ``Q1`` to instance ``1 - b``.  Brackets go to
that instance's operator, batches are checked by its verifier, and the
adversary sees every response plus both ledgers.

The client oracle is the simulated one: spends carry random serial numbers,
authorizers and input commitments with trapdoor-forged proofs; outputs for
honest recipients are random commitments with random ciphertexts; outputs
for adversary addresses are built for real.  Both instances draw from one
shared randomness stream, so for publicly consistent scripts the whole
adversary-visible transcript is a function of public data alone and must be
bit-identical under ``b = 0`` and ``b = 1``.

``leaky=True`` is the negative control: honest-recipient ciphertexts are
replaced by the plaintext (token, value, fee), which a trivial distinguisher
exploits.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field

from .. import blob, crypto, txmodel
from ..circuits import INPUT_CIRCUIT, TX_CIRCUIT, InputStatement, ReferenceBackend, slot_statement
from ..crypto import CoinKeyPair, EncKeyPair, SignatureKeyPair
from ..l1sim import BRIDGE, Revert
from ..roles import BracketRejected
from ..txmodel import Kind, Transaction, TxInput, TxOutput
from .world import Config, OperatorSpec, VerifierSpec, backend_key, build_world

HONEST, ADVERSARY = "h", "a"


# --- queries --------------------------------------------------------------------------


@dataclass(frozen=True)
class CreateAddress:
    pass


@dataclass(frozen=True)
class PegIn:
    addr: int  # index of an address made by CreateAddress
    token: int
    value: int
    g: int


@dataclass(frozen=True)
class Mint:
    addr: int
    nonce: int
    fee: int


@dataclass(frozen=True)
class Out:
    to: str  # HONEST or ADVERSARY
    idx: int
    token: int
    value: int
    fee: int

    @property
    def assets(self) -> tuple[int, int, int]:
        return (self.token, self.value, self.fee)


@dataclass(frozen=True)
class Transfer:
    inputs: tuple[int, ...]  # coin indices
    outputs: tuple[Out, ...]
    fee: int


@dataclass(frozen=True)
class Burn:
    cid: int
    id_l1: str
    fee: int


@dataclass(frozen=True)
class L2List:
    """Several client queries whose transactions share one bracket."""

    items: tuple


@dataclass(frozen=True)
class PegOut:
    id_l1: str


@dataclass(frozen=True)
class Seal:
    pass


@dataclass(frozen=True)
class Advance:
    blocks: int = 1


CLIENT_QUERIES = (Mint, Transfer, Burn, L2List)
PUBLIC_QUERIES = (PegIn, PegOut, Seal, Advance)


# --- public consistency ------------------------------------------------------------------


@dataclass(frozen=True)
class CoinInfo:
    owner: str  # HONEST, or ADVERSARY for outputs paid to adversary addresses
    token: int
    value: int
    fee: int

    @property
    def assets(self) -> tuple[int, int, int]:
        return (self.token, self.value, self.fee)


def check_public_consistency(q0, q1, side0, side1) -> bool:
    """Would the challenger accept ``(q0, q1)``?

    ``side0``/``side1`` are the client oracles that will answer ``q0``/``q1``;
    they supply coin lookups and the oracle's own validity check.
    """
    if type(q0) is not type(q1):
        return False
    if isinstance(q0, CreateAddress):
        return True
    if isinstance(q0, (PegIn, Mint, PegOut, Seal, Advance)):
        return q0 == q1
    if side0.reject_reason(q0) is not None or side1.reject_reason(q1) is not None:
        # equal validity outcomes; both-invalid pairs are consistent and answered with bot
        return (side0.reject_reason(q0) is None) == (side1.reject_reason(q1) is None)
    if isinstance(q0, Burn):
        return (q0.id_l1, q0.fee) == (q1.id_l1, q1.fee) and \
            side0.coin(q0.cid).assets == side1.coin(q1.cid).assets
    if isinstance(q0, Transfer):
        return _transfers_consistent(q0, q1, side0, side1)
    if isinstance(q0, L2List):
        return len(q0.items) == len(q1.items) and all(
            _item_consistent(a, b, side0, side1) for a, b in zip(q0.items, q1.items)
        )
    return False


def _item_consistent(a, b, side0, side1) -> bool:
    if type(a) is not type(b) or isinstance(a, L2List):
        return False
    if isinstance(a, Mint):
        return a == b
    if isinstance(a, Burn):
        c0, c1 = side0.coin(a.cid), side1.coin(b.cid)
        return (a.id_l1, a.fee) == (b.id_l1, b.fee) and c0 is not None and c1 is not None \
            and c0.assets == c1.assets
    return _transfers_consistent(a, b, side0, side1)


def _transfers_consistent(q0: Transfer, q1: Transfer, side0, side1) -> bool:
    if len(q0.inputs) != len(q1.inputs) or len(q0.outputs) != len(q1.outputs):
        return False
    if q0.fee != q1.fee:
        return False
    if sum(o.value for o in q0.outputs) != sum(o.value for o in q1.outputs):
        return False
    # outputs an adversary can open must be identical on both sides
    for a, b in zip(q0.outputs, q1.outputs):
        if (a.to == ADVERSARY or b.to == ADVERSARY) and a != b:
            return False
    # inputs the adversary knows the assets of must line up as well
    for i, j in zip(q0.inputs, q1.inputs):
        c0, c1 = side0.coin(i), side1.coin(j)
        if c0 is None or c1 is None:
            return False
        if (c0.owner == ADVERSARY or c1.owner == ADVERSARY) and c0 != c1:
            return False
    return True


# --- simulated client oracle ---------------------------------------------------------------


@dataclass
class HonestAddress:
    sig: SignatureKeyPair
    enc: EncKeyPair
    coin: CoinKeyPair
    # what the adversary is given in place of the real coin key
    public_pk_coin: int

    @property
    def id_l1(self) -> str:
        return self.sig.id_l1


@dataclass(frozen=True)
class AdversaryAddress:
    coin: CoinKeyPair
    enc: EncKeyPair


@dataclass
class SimCoin:
    info: CoinInfo
    c: int
    spent: bool = False


def _plaintext_note(token: int, value: int, fee: int) -> bytes:
    data = b"".join(crypto.encode(x) for x in (token, value, fee))
    return data + bytes(crypto.CT_BYTES - len(data))


@dataclass
class SimClient:
    """The simulated client oracle of one game instance."""

    rng: random.Random
    world: object
    adversaries: list[AdversaryAddress]
    leaky: bool = False
    addresses: list[HonestAddress] = field(default_factory=list)
    coins: list[SimCoin] = field(default_factory=list)
    pegins: dict[int, tuple[int, SignatureKeyPair]] = field(default_factory=dict)
    minted: set[int] = field(default_factory=set)
    keyring: txmodel.KeyRing = field(default_factory=txmodel.KeyRing)

    @property
    def chain(self):
        return self.world.chain

    @property
    def backend(self) -> ReferenceBackend:
        return self.chain.backend

    @property
    def view(self):
        return self.world.view

    def coin(self, cid: int) -> CoinInfo | None:
        if isinstance(cid, int) and 0 <= cid < len(self.coins):
            return self.coins[cid].info
        return None

    # address and L1 queries -------------------------------------------------------------

    def create_address(self) -> tuple:
        addr = HonestAddress(
            self.keyring.add(SignatureKeyPair.generate(self.rng)),
            EncKeyPair.generate(self.rng),
            CoinKeyPair.generate(self.rng),
            crypto.random_fe(self.rng),
        )
        self.addresses.append(addr)
        return (len(self.addresses) - 1, addr.id_l1, addr.sig.pk_sig, addr.public_pk_coin, addr.enc.pk_enc.hex())

    def peg_in(self, q: PegIn) -> tuple:
        if not 0 <= q.addr < len(self.addresses):
            return ("bot",)
        who = self.addresses[q.addr].id_l1
        sig = self.keyring.add(SignatureKeyPair.generate(self.rng))
        chain = self.chain
        try:
            if q.token == 0:
                chain.credit_native(who, q.g)
                nonce = chain.fee_to_l2(who, sig.pk_sig, q.g)
            else:
                chain.credit_native(who, q.g)
                chain.credit_token(q.token, who, q.value)
                chain.approve(q.token, who, BRIDGE, q.value)
                nonce = chain.to_l2(who, q.token, q.value, sig.pk_sig, q.g)
        except Revert as e:
            return ("reverted", str(e))
        self.pegins[nonce] = (q.addr, sig)
        return ("nonce", nonce)

    def peg_out(self, q: PegOut) -> tuple:
        got = []
        for h in sorted(self.chain.burn_data):
            if not self.chain.block_finalized(h):
                continue
            for (i, j), rec in sorted(self.chain.burn_data[h].items()):
                if rec.id_l1 == q.id_l1:
                    try:
                        self.chain.retrieve(q.id_l1, h, i, j)
                    except Revert:
                        continue
                    got.append((h, i, j, rec.token, rec.value, rec.fee))
        return ("retrieved", tuple(got))

    # validity -----------------------------------------------------------------------------

    def reject_reason(self, q, spent=None, minted=None) -> str | None:
        spent = set() if spent is None else spent
        minted = set() if minted is None else minted
        if isinstance(q, L2List):
            if not q.items or any(isinstance(x, L2List) for x in q.items):
                return "malformed list"
            for x in q.items:
                why = self.reject_reason(x, spent, minted)
                if why:
                    return why
                if isinstance(x, Transfer):
                    spent.update(x.inputs)
                elif isinstance(x, Burn):
                    spent.add(x.cid)
                elif isinstance(x, Mint):
                    minted.add(x.nonce)
            return None
        floors = self.world.config.floors
        if isinstance(q, Mint):
            rec = self.chain.get_mint_data(q.nonce)
            if q.nonce not in self.pegins or rec is None:
                return "unknown bridge nonce"
            if self.pegins[q.nonce][0] != q.addr:
                return "nonce belongs to another address"
            if q.nonce in self.minted or q.nonce in minted:
                return "nonce already minted"
            if not floors.mint <= q.fee <= rec.fee:
                return "mint fee out of range"
            return None
        if isinstance(q, Burn):
            why = self._spendable(q.cid, spent)
            if why:
                return why
            if not floors.burn <= q.fee <= self.coins[q.cid].info.fee:
                return "burn fee out of range"
            try:
                crypto.address_to_int(q.id_l1)
            except (TypeError, ValueError):
                return "bad L1 address"
            return None
        if isinstance(q, Transfer):
            if not q.inputs or len(q.inputs) + len(q.outputs) > txmodel.circuits.M_SLOTS:
                return "bad shape"
            if len(set(q.inputs)) != len(q.inputs):
                return "input repeated"
            for cid in q.inputs:
                why = self._spendable(cid, spent)
                if why:
                    return why
            ins = [self.coins[c].info for c in q.inputs]
            tokens = {c.token for c in ins} | {o.token for o in q.outputs}
            if len(tokens - {0}) > 1:
                return "more than one value token"
            if sum(c.value for c in ins) != sum(o.value for o in q.outputs):
                return "values do not balance"
            if sum(c.fee for c in ins) != sum(o.fee for o in q.outputs) + q.fee:
                return "fees do not balance"
            if q.fee < floors.transfer:
                return "fee below floor"
            for o in q.outputs:
                if not (0 <= o.value < 2**64 and 0 <= o.fee < 2**64):
                    return "amount out of range"
                if o.token == 0 and o.value:
                    return "the fee token carries no value"
                pool = self.addresses if o.to == HONEST else self.adversaries
                if o.to not in (HONEST, ADVERSARY) or not 0 <= o.idx < len(pool):
                    return "unknown recipient"
            return None
        return "not a client query"

    def _spendable(self, cid, spent) -> str | None:
        coin = self.coin(cid)
        if coin is None:
            return "no such coin"
        if coin.owner != HONEST:
            return "coin not held by this oracle"
        sc = self.coins[cid]
        if sc.spent or cid in spent:
            return "coin already spent"
        if sc.c not in self.view.coin_index:
            return "coin not on L2"
        return None

    # transaction builders --------------------------------------------------------------------

    def _tip(self):
        view = self.view
        if view.height == 0:
            return txmodel.GENESIS_REF, 0
        return txmodel.CrtRef(view.height, len(view.checkpoints[view.height]) - 1), view.coins.root

    def _fake_input(self, crt: int, cm: int) -> TxInput:
        sig = self.keyring.add(SignatureKeyPair.generate(self.rng))
        sn = crypto.random_fe(self.rng)
        proof = self.backend.forge(INPUT_CIRCUIT, InputStatement(crt, sn, cm, sig.pk_sig))
        return TxInput(crt, sn, cm, sig.pk_sig, proof.data)

    def _output(self, o: Out) -> TxOutput:
        if o.to == ADVERSARY:
            adv = self.adversaries[o.idx]
            secrets = crypto.CoinSecrets(o.token, o.value, o.fee, crypto.random_fe(self.rng))
            enc = crypto.encrypt_note(adv.enc.pk_enc, secrets, self.rng)
            return TxOutput(crypto.output_commitment(secrets, adv.coin.pk_coin), enc)
        c = crypto.random_fe(self.rng)
        if self.leaky:
            return TxOutput(c, _plaintext_note(o.token, o.value, o.fee))
        return TxOutput(c, crypto.random_ciphertext(self.rng))

    def _mint_tx(self, q: Mint) -> Transaction:
        rec = self.chain.get_mint_data(q.nonce)
        _, sig = self.pegins[q.nonce]
        secrets = crypto.CoinSecrets(rec.token, rec.value, rec.fee - q.fee, crypto.random_fe(self.rng))
        pk_coin = crypto.random_fe(self.rng)
        return txmodel.build_mint(secrets, pk_coin, q.nonce, sig.pk_sig, q.fee)

    def _burn_tx(self, q: Burn) -> Transaction:
        ref, crt = self._tip()
        info = self.coins[q.cid].info
        pk_auth = crypto.random_fe(self.rng)
        cm = crypto.input_commitment(info.token, info.value, info.fee, pk_auth)
        body = txmodel.BurnBody(info.value, info.fee, pk_auth, crypto.address_to_int(q.id_l1))
        return Transaction(Kind.BURN, info.token, (self._fake_input(crt, cm),), (), q.fee,
                           crt_ref=ref, body=body).with_hash()

    def _transfer_tx(self, q: Transfer) -> Transaction:
        ref, crt = self._tip()
        inputs = tuple(self._fake_input(crt, crypto.random_fe(self.rng)) for _ in q.inputs)
        outputs = tuple(self._output(o) for o in q.outputs)
        stmt = slot_statement([i.cm for i in inputs], [o.c for o in outputs], q.fee)
        proof = self.backend.forge(TX_CIRCUIT, stmt)
        return Transaction(Kind.TRANSFER, 0, inputs, outputs, q.fee, crt_ref=ref,
                           tx_proof=proof.data).with_hash()

    def _record(self, q, tx: Transaction) -> tuple[int, ...]:
        """Update COINS for one created transaction; returns new coin indices."""
        new = []
        if isinstance(q, Mint):
            rec = self.chain.get_mint_data(q.nonce)
            self.minted.add(q.nonce)
            infos = [CoinInfo(HONEST, rec.token, rec.value, rec.fee - q.fee)]
        elif isinstance(q, Burn):
            self.coins[q.cid].spent = True
            infos = []
        else:
            for cid in q.inputs:
                self.coins[cid].spent = True
            infos = [CoinInfo(o.to, o.token, o.value, o.fee) for o in q.outputs]
        for info, out in zip(infos, tx.outputs):
            self.coins.append(SimCoin(info, out.c))
            new.append(len(self.coins) - 1)
        return tuple(new)

    def handle_client(self, q) -> tuple:
        """Answer a Mint/Transfer/Burn (or list) query; the bracket goes to the operator."""
        why = self.reject_reason(q)
        if why is not None:
            return ("bot",)
        items = q.items if isinstance(q, L2List) else (q,)
        txs, cids = [], []
        for x in items:
            build = {Mint: self._mint_tx, Burn: self._burn_tx, Transfer: self._transfer_tx}[type(x)]
            tx = build(x)
            txs.append(tx)
            cids.append(self._record(x, tx))
        br = txmodel.bracket_sign(txmodel.bracket_make(txs), self.keyring)
        try:
            status = self.world.operator.add_bracket(br)
        except BracketRejected as e:
            status = f"rejected: {e.reason}"
        return ("bracket", tuple(cids), tuple(blob.encode_bracket(br)), status)


# --- the game ------------------------------------------------------------------------------


def _ledger_digest(chain) -> str:
    """Digest of everything an observer can read from one instance's L1."""
    state = (
        chain.block, sorted(chain.native.items()), sorted(chain.tokens.items()),
        [(e.kind, e.block, e.data) for e in chain.events],
        sorted(chain.commitments.items()), sorted(chain.publishers.items()),
        sorted((h, sorted(d.items())) for h, d in chain.burn_data.items()),
        chain.cur_height, chain.hnb,
    )
    return hashlib.sha256(repr(state).encode()).hexdigest()


@dataclass
class Instance:
    world: object
    client: SimClient


@dataclass
class GameState:
    b: int
    instances: list[Instance]
    adversaries: list[AdversaryAddress]
    transcript: list = field(default_factory=list)
    rejected: int = 0
    lost: bool = False  # a verifier produced a fraud proof

    def chains(self):
        return [inst.world.chain for inst in self.instances]


def _instance(seed: int, leaky: bool, adversaries, config: Config) -> Instance:
    backend = ReferenceBackend(key=backend_key(seed), trapdoor=True)
    world = build_world(
        seed, config, [], [OperatorSpec("operator", config.min_stake)],
        [VerifierSpec("verifier")], backend=backend,
    )
    client = SimClient(random.Random(f"lind-client:{seed}"), world, adversaries, leaky)
    return Instance(world, client)


def adversary_addresses(seed: int, n: int = 2) -> list[AdversaryAddress]:
    rng = random.Random(f"lind-adversary:{seed}")
    return [AdversaryAddress(CoinKeyPair.generate(rng), EncKeyPair.generate(rng)) for _ in range(n)]


def new_game(b: int, seed: int, leaky: bool = False, config: Config | None = None) -> GameState:
    config = config or Config(fpp=2)
    adv = adversary_addresses(seed)
    return GameState(b, [_instance(seed, leaky, adv, config) for _ in range(2)], adv)


def _seal(inst: Instance) -> tuple:
    world = inst.world
    op = world.operator
    try:
        h = op.seal()
    except Revert as e:
        return ("reverted", str(e))
    disputes = world.scan_all()
    return ("sealed", h, tuple((d.rule, d.accepted) for d in disputes))


def submit(game: GameState, q0, q1) -> tuple:
    """One round: consistency check, then route the pair; returns the response pair."""
    a, b_inst = game.instances[game.b], game.instances[1 - game.b]
    if isinstance(q0, CreateAddress) and isinstance(q1, CreateAddress):
        resp = (a.client.create_address(), b_inst.client.create_address())
        if resp[0] != resp[1]:
            raise AssertionError("the two client oracles created different addresses")
    elif not check_public_consistency(q0, q1, a.client, b_inst.client):
        game.rejected += 1
        resp = ("rejected",)
    elif isinstance(q0, (Seal, Advance, PegIn, PegOut)):
        # public requests go to instance 0 and 1 in query order
        out = []
        for inst, q in zip(game.instances, (q0, q1)):
            if isinstance(q, Seal):
                r = _seal(inst)
                game.lost |= any(acc for _, acc in r[2]) if r[0] == "sealed" else False
            elif isinstance(q, Advance):
                inst.world.chain.advance_block(q.blocks)
                r = ("block", inst.world.chain.block)
            elif isinstance(q, PegIn):
                r = inst.client.peg_in(q)
            else:
                r = inst.client.peg_out(q)
            out.append(r)
        resp = tuple(out)
    else:
        r0, r1 = a.client.handle_client(q0), b_inst.client.handle_client(q1)
        resp = (r0, r1)
    game.transcript.append((type(q0).__name__, resp, tuple(_ledger_digest(c) for c in game.chains())))
    return resp


def play(script, b: int, seed: int, leaky: bool = False) -> GameState:
    game = new_game(b, seed, leaky)
    for q0, q1 in script:
        submit(game, q0, q1)
    return game


def transcripts_equal(script, seed: int, leaky: bool = False) -> tuple[bool, GameState, GameState]:
    """Strict mode: the adversary's view must not depend on b at all."""
    g0, g1 = play(script, 0, seed, leaky), play(script, 1, seed, leaky)
    return g0.transcript == g1.transcript, g0, g1


# --- scripts -------------------------------------------------------------------------------


@dataclass
class _SideModel:
    """The script generator's bookkeeping for one query side."""

    coins: list = field(default_factory=list)  # [owner, token, value, fee, spent, live]

    def unspent(self, live_only=True):
        return [i for i, c in enumerate(self.coins)
                if c[0] == HONEST and not c[4] and (c[5] or not live_only)]


def random_consistent_script(rng: random.Random, fpp: int = 2) -> list[tuple]:
    """A publicly consistent script mixing mints, transfers, burns and withdrawals."""
    script = []
    n_addr = rng.randint(2, 4)
    script += [(CreateAddress(), CreateAddress())] * n_addr
    sides = [_SideModel(), _SideModel()]
    nonce = 0
    tokens = (1, 2)

    def seal():
        script.append((Seal(), Seal()))
        for s in sides:
            for c in s.coins:
                c[5] = True

    # mints: identical on both sides (all public)
    for _ in range(rng.randint(3, 6)):
        addr, token = rng.randrange(n_addr), rng.choice(tokens)
        value, g = rng.choice((4, 6, 10)), rng.choice((6, 8))
        fee = rng.randint(0, 1)
        nonce += 1
        script.append((PegIn(addr, token, value, g),) * 2)
        script.append((Mint(addr, nonce, fee),) * 2)
        for s in sides:
            s.coins.append([HONEST, token, value, g - fee, False, False])
    seal()

    burned_to = []
    for _ in range(rng.randint(2, 4)):
        kind = rng.random()
        if kind < 0.75:
            pair = _random_transfer_pair(rng, sides, n_addr)
            if pair:
                items = [pair]
                if rng.random() < 0.2:
                    extra = _random_transfer_pair(rng, sides, n_addr)
                    if extra:
                        items.append(extra)
                if len(items) == 1:
                    script.append(pair)
                else:
                    script.append((L2List(tuple(p[0] for p in items)), L2List(tuple(p[1] for p in items))))
        else:
            pair = _random_burn_pair(rng, sides)
            if pair:
                script.append(pair)
                burned_to.append(pair[0].id_l1)
        if rng.random() < 0.5:
            seal()
    seal()
    if burned_to:
        script.append((Advance(fpp + 1),) * 2)
        seal()
        for who in sorted(set(burned_to)):
            script.append((PegOut(who),) * 2)
    return script


def _split(rng, total: int, parts: int) -> list[int]:
    cuts = sorted(rng.randint(0, total) for _ in range(parts - 1))
    return [b - a for a, b in zip([0, *cuts], [*cuts, total])]


def _random_transfer_pair(rng, sides, n_addr):
    s0, s1 = sides
    live0 = s0.unspent()
    if not live0:
        return None
    n_in = rng.randint(1, min(2, len(live0)))
    in0 = rng.sample(live0, n_in)
    c0 = [s0.coins[i] for i in in0]
    if len({c[1] for c in c0}) > 1:
        return None
    token = c0[0][1]
    v_tot, g_tot = sum(c[2] for c in c0), sum(c[3] for c in c0)
    # Q1 may spend different coins with the same totals, or the same indices
    candidates = [in0]
    live1 = s1.unspent()
    for _ in range(20):
        if len(live1) < n_in:
            break
        alt = rng.sample(live1, n_in)
        cs = [s1.coins[i] for i in alt]
        if len({c[1] for c in cs}) == 1 and sum(c[2] for c in cs) == v_tot and sum(c[3] for c in cs) == g_tot:
            candidates.append(alt)
    in1 = rng.choice(candidates)
    c1 = [s1.coins[i] for i in in1]
    if any(c[4] or not c[5] or c[0] != HONEST for c in c1) or len({c[1] for c in c1}) > 1:
        return None
    token1 = c1[0][1]
    if sum(c[2] for c in c1) != v_tot or sum(c[3] for c in c1) != g_tot:
        return None
    fee = 1
    if g_tot < fee:
        return None
    n_out = rng.randint(1, 3)
    to_adv = [rng.random() < 0.25 for _ in range(n_out)]
    if token1 != token and any(to_adv):
        to_adv = [False] * n_out
    vals0, fees0 = _split(rng, v_tot, n_out), _split(rng, g_tot - fee, n_out)
    vals1, fees1 = list(vals0), list(fees0)
    honest = [k for k in range(n_out) if not to_adv[k]]
    if len(honest) > 1 and rng.random() < 0.7:
        hv = _split(rng, sum(vals0[k] for k in honest), len(honest))
        hg = _split(rng, sum(fees0[k] for k in honest), len(honest))
        for n, k in enumerate(honest):
            vals1[k], fees1[k] = hv[n], hg[n]
    outs0, outs1 = [], []
    for k in range(n_out):
        if to_adv[k]:
            o = Out(ADVERSARY, rng.randrange(2), token, vals0[k], fees0[k])
            outs0.append(o)
            outs1.append(o)
        else:
            outs0.append(Out(HONEST, rng.randrange(n_addr), token, vals0[k], fees0[k]))
            outs1.append(Out(HONEST, rng.randrange(n_addr), token1, vals1[k], fees1[k]))
    for side, ins, outs in ((s0, in0, outs0), (s1, in1, outs1)):
        for i in ins:
            side.coins[i][4] = True
        for o in outs:
            side.coins.append([o.to, o.token, o.value, o.fee, False, False])
    return Transfer(tuple(in0), tuple(outs0), fee), Transfer(tuple(in1), tuple(outs1), fee)


def _random_burn_pair(rng, sides):
    s0, s1 = sides
    live0 = [i for i in s0.unspent() if s0.coins[i][3] >= 1]
    if not live0:
        return None
    i0 = rng.choice(live0)
    assets = tuple(s0.coins[i0][1:4])
    matches = [i for i in s1.unspent() if tuple(s1.coins[i][1:4]) == assets]
    if not matches:
        return None
    i1 = rng.choice(matches)
    s0.coins[i0][4] = s1.coins[i1][4] = True
    who = crypto.int_to_address(rng.getrandbits(160))
    return Burn(i0, who, 1), Burn(i1, who, 1)


def challenge_script(rng: random.Random) -> tuple[list[tuple], int, int]:
    """Two honest payees; Q0 and Q1 pay different private amounts to them.

    Returns the script and the amounts paid to the first payee by Q0 and Q1.
    """
    script = [(CreateAddress(), CreateAddress())] * 3
    script += [(PegIn(0, 1, 10, 5),) * 2, (Mint(0, 1, 0),) * 2, (Seal(), Seal())]
    x = rng.randint(0, 10)
    y = rng.choice([v for v in range(11) if v != x])
    q0 = Transfer((0,), (Out(HONEST, 1, 1, x, 2), Out(HONEST, 0, 1, 10 - x, 2)), 1)
    q1 = Transfer((0,), (Out(HONEST, 1, 1, y, 2), Out(HONEST, 0, 1, 10 - y, 2)), 1)
    script += [(q0, q1), (Seal(), Seal())]
    return script, x, y


# --- adversaries ---------------------------------------------------------------------------


class RandomGuess:
    name = "random"

    def guess(self, game: GameState, x: int, y: int, rng: random.Random) -> int:
        return rng.getrandbits(1)


class PlaintextDistinguisher:
    """Reads payee outputs of instance 0 as if they were plaintext notes."""

    name = "plaintext"

    def guess(self, game: GameState, x: int, y: int, rng: random.Random) -> int:
        chain = game.chains()[0]
        parsed = blob.parse_batch(chain.blobs[chain.cur_height])
        for br in parsed.brackets:
            for tx in br.txs:
                if tx.kind == Kind.TRANSFER and tx.outputs[0].enc is not None:
                    words = blob.bytes_to_words(tx.outputs[0].enc)
                    if words[1] == x and words[1] != y:
                        return 0  # instance 0 answered Q0
                    if words[1] == y:
                        return 1
        return rng.getrandbits(1)


class LinkageDistinguisher:
    """Looks for the bracket returned to Q0 inside instance 0's ledger."""

    name = "linkage"

    def guess(self, game: GameState, x: int, y: int, rng: random.Random) -> int:
        transfer = next(r for name, r, _ in game.transcript if name == "Transfer")
        words0, words1 = transfer[0][2], transfer[1][2]
        if words0 == words1:
            return rng.getrandbits(1)
        chain = game.chains()[0]
        flat = chain.blobs[chain.cur_height].words
        tx_hash0 = words0[blob.BRACKET_FIXED + 1]
        return 0 if tx_hash0 in flat else 1


STRATEGIES = {s.name: s for s in (RandomGuess, PlaintextDistinguisher, LinkageDistinguisher)}


def wilson_interval(wins: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = wins / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (centre - half, centre + half)


@dataclass
class LindStats:
    strategy: str
    rounds: int
    wins: int
    rejected: int
    lost: int
    leaky: bool

    @property
    def rate(self) -> float:
        return self.wins / self.rounds if self.rounds else 0.0

    @property
    def advantage(self) -> float:
        return self.rate - 0.5

    @property
    def interval(self) -> tuple[float, float]:
        return wilson_interval(self.wins, self.rounds)

    def summary(self) -> str:
        lo, hi = self.interval
        return (f"strategy={self.strategy} leaky={self.leaky} rounds={self.rounds} wins={self.wins} "
                f"rate={self.rate:.3f} wilson95=[{lo:.3f},{hi:.3f}] advantage={self.advantage:+.3f}")


def run_lind_game(strategy, rounds: int, seed: int = 0, leaky: bool = False) -> LindStats:
    """Play ``rounds`` independent games, each with a fresh hidden bit."""
    if isinstance(strategy, str):
        strategy = STRATEGIES[strategy]()
    rng = random.Random(f"lind:{seed}")
    wins = rejected = lost = 0
    for r in range(rounds):
        b = rng.getrandbits(1)
        script, x, y = challenge_script(rng)
        game = play(script, b, seed * 1_000_003 + r, leaky)
        rejected += game.rejected
        lost += game.lost
        if not game.lost and strategy.guess(game, x, y, rng) == b:
            wins += 1
    return LindStats(strategy.name, rounds, wins, rejected, lost, leaky)
