"""Account system: registration with email verification, login sessions,
and tier administration.

Passwords are stored only as salted scrypt digests; verification codes are
single-use 6-digit values expiring after 15 minutes; session tokens carry
128+ bits of entropy and live for 24 hours. Email delivery goes through an
outbound-message port so tests and dev deployments never touch SMTP.
"""

from __future__ import annotations

import hashlib
import hmac
import logging
import secrets
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Callable, List, Optional, Tuple

from .domain import UserTier, new_id, utcnow
from .store import Store

log = logging.getLogger(__name__)

MIN_PASSWORD_LENGTH = 8
CODE_TTL = timedelta(minutes=15)
SESSION_TTL = timedelta(hours=24)

_SCRYPT_N, _SCRYPT_R, _SCRYPT_P = 2 ** 14, 8, 1


class AccountError(Exception):
    pass


class DuplicateUsername(AccountError):
    pass


class DuplicateEmail(AccountError):
    pass


class WeakPassword(AccountError):
    pass


class CodeMismatch(AccountError):
    pass


class CodeExpired(AccountError):
    pass


class AlreadyVerified(AccountError):
    pass


class BadCredentials(AccountError):
    pass


class Unverified(AccountError):
    pass


class NotAuthorized(AccountError):
    pass


@dataclass(frozen=True)
class OutboundMessage:
    to_email: str
    subject: str
    body: str


class RecordingMailSink:
    """Test double: records every message instead of sending it."""

    def __init__(self):
        self.messages: List[OutboundMessage] = []

    def __call__(self, message: OutboundMessage) -> None:
        self.messages.append(message)

    def last_code_for(self, email: str) -> Optional[str]:
        for m in reversed(self.messages):
            if m.to_email == email:
                return m.body.strip().split()[-1]
        return None


def log_mail_sink(message: OutboundMessage) -> None:
    log.info("outbound mail to %s: %s", message.to_email, message.subject)


MailSink = Callable[[OutboundMessage], None]


def hash_password(password: str) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.scrypt(password.encode(), salt=salt,
                            n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P)
    return f"scrypt${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        _, salt_hex, digest_hex = stored.split("$")
        expected = bytes.fromhex(digest_hex)
        actual = hashlib.scrypt(password.encode(), salt=bytes.fromhex(salt_hex),
                                n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P)
        return hmac.compare_digest(actual, expected)
    except (ValueError, TypeError):
        return False


class AccountService:
    def __init__(self, store: Store, mail_sink: MailSink = log_mail_sink):
        self.store = store
        self.mail_sink = mail_sink

    def register(self, username: str, email: str, password: str,
                 now: Optional[datetime] = None) -> str:
        """Create an unverified account and dispatch a verification code.

        Returns the new user_id.
        """
        now = now or utcnow()
        email = email.strip().lower()
        if len(password) < MIN_PASSWORD_LENGTH:
            raise WeakPassword(f"password must be at least {MIN_PASSWORD_LENGTH} characters")
        if self.store.get_user(username=username) is not None:
            raise DuplicateUsername(username)
        if self.store.get_user(email=email) is not None:
            raise DuplicateEmail(email)
        user_id = new_id("user")
        self.store.insert_user(user_id, username, email, hash_password(password),
                               UserTier.REGULAR, now)
        code = f"{secrets.randbelow(1_000_000):06d}"
        self.store.insert_code(email, code, now, now + CODE_TTL)
        self.mail_sink(OutboundMessage(
            to_email=email,
            subject="Your verification code",
            body=f"Your verification code is {code}",
        ))
        return user_id

    def verify_email(self, email: str, code: str, now: Optional[datetime] = None) -> None:
        now = now or utcnow()
        email = email.strip().lower()
        user = self.store.get_user(email=email)
        if user is None:
            raise CodeMismatch("no matching code")
        if user["verified"]:
            raise AlreadyVerified(email)
        outcome = self.store.consume_code(email, code, now)
        if outcome == "expired":
            raise CodeExpired("verification code expired")
        if outcome != "ok":
            raise CodeMismatch("no matching code")
        self.store.mark_verified(email)

    def login(self, identifier: str, password: str,
              now: Optional[datetime] = None) -> str:
        """Verify credentials and mint a session token.

        Unknown user and wrong password raise the same BadCredentials.
        """
        now = now or utcnow()
        user = self.store.find_user_by_identifier(identifier)
        if user is None or not verify_password(password, user["credential_digest"]):
            raise BadCredentials("invalid username/email or password")
        if not user["verified"]:
            raise Unverified("email not verified")
        token = secrets.token_urlsafe(32)  # 256 bits
        self.store.insert_session(token, user["user_id"], now + SESSION_TTL)
        return token

    def authenticate(self, token: str, now: Optional[datetime] = None):
        """Resolve a bearer token to its user row, or None."""
        if not token:
            return None
        return self.store.session_user(token, now or utcnow())

    def set_tier(self, acting_user, target_user_id: str, tier: UserTier) -> None:
        """Administrative tier change; Super users only."""
        if UserTier(acting_user["tier"]) != UserTier.SUPER:
            raise NotAuthorized("only super users may change tiers")
        self.store.set_tier(target_user_id, tier)
