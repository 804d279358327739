import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
from sklearn.model_selection import train_test_split
from lightgbm import LGBMClassifier
from sklearn.metrics import f1_score

df = pd.read_csv('../input/employee_attrition.csv')

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

cat_cols = df.select_dtypes(include='object').columns
for c in cat_cols:
    print(df[c].value_counts().head())

print(df['age'].describe())
print(df['age'].skew())
sns.histplot(df['age'], kde=True)
plt.show()

for col in df.columns:
    print(col, df[col].nunique())

missing = df.isnull().mean() * 100
missing = missing.sort_values(ascending=False)
print(missing.head(10))

print(df.shape)
df.head()
df.info()
df.describe()

def summarize(frame):
    return frame.describe().T

summary = summarize(df)
print(summary)

df.hist(bins=30, figsize=(12, 8))
plt.tight_layout()
plt.show()

df.isnull().sum()
print(df.dtypes)
df.nunique()

plt.figure(figsize=(8, 4))
sns.boxplot(x='target', y='age', data=df)
plt.xticks(rotation=45)
plt.show()

df = df.dropna(subset=['target'])
df['department'] = df['department'].fillna(df['department'].mode()[0])
df['education'] = df['education'].fillna(df['education'].mode()[0])
df['age'] = df['age'].fillna(df['age'].median())
df['salary'] = df['salary'].fillna(df['salary'].median())
df['years_at_company'] = df['years_at_company'].fillna(df['years_at_company'].median())
df['target'] = df['target'].map({'yes': 1, 'no': 0})

X = df.drop('target', axis=1)
y = df['target']
X = pd.get_dummies(X)
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.3, random_state=44)
print(X_train.shape, X_test.shape)


model = LGBMClassifier()
model.fit(X_train, y_train)
preds = model.predict(X_test)
print('f1', f1_score(y_test, preds, average='macro'))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
