import json

import requests

import config

SOURCE = "antsynth"


def _run_label(run):
    return ", ".join(f"{key}={value}" for key, value in run.items())


def send_alert(message, severity="info", details=None, run=None):
    """
    Posts a synthesis notification to the configured webhook.

    Args:
        message (str): Headline, e.g. "Synthesis run finished".
        severity (str): info, low, medium, high or critical.
        details (dict, optional): Result figures (best fitness, SLL, per-optimizer rows).
        run (dict, optional): What produced the result: optimizer name(s), seed,
            element count, evaluation budget.

    Returns:
        bool: True when the webhook accepted the payload. Without a webhook
        the alert is printed and False is returned.
    """
    run = dict(run or {})
    if not config.WEBHOOK_URL:
        label = f" ({_run_label(run)})" if run else ""
        print(f"[Alert - {severity}] {message}{label}")
        if details:
            print(f"Details: {json.dumps(details, indent=2, default=str)}")
        return False

    payload = {
        "source": SOURCE,
        "message": message,
        "severity": severity,
        "run": run,
        "details": details or {},
    }

    try:
        response = requests.post(config.WEBHOOK_URL, json=payload, timeout=10)
        response.raise_for_status()
        return True
    except requests.exceptions.RequestException as e:
        print(f"[!] Failed to send alert for {run.get('optimizer', SOURCE)}: {e}")
        return False
